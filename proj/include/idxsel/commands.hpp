#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace idxsel {

// One per CLI run, written next to the primary output.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config;  // fully resolved settings
  nlohmann::json seeds;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
};

// Parses argv, dispatches the subcommand and returns the process exit code:
// 0 on success, 2 on usage errors, 1 on validation or runtime errors. CSV
// written to stdout goes to out; diagnostics go to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace idxsel
