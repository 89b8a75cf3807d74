#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace idxsel {

// Fixed order everywhere: read, update, scan, insert, rmw.
enum class OpKind : std::uint8_t { Read = 0, Update = 1, Scan = 2, Insert = 3, Rmw = 4 };

inline constexpr std::size_t kOpKindCount = 5;
inline constexpr std::array<OpKind, kOpKindCount> kAllOpKinds = {
    OpKind::Read, OpKind::Update, OpKind::Scan, OpKind::Insert, OpKind::Rmw};

std::string_view to_string(OpKind kind);

struct KeyDistribution {
  enum class Kind : std::uint8_t { Uniform, Zipfian };
  Kind kind = Kind::Zipfian;
  double theta = 0.99;

  friend bool operator==(const KeyDistribution&, const KeyDistribution&) = default;
};

struct WorkloadSpec {
  std::string name = "workload";
  std::array<double, kOpKindCount> proportions{};
  std::uint64_t op_count = 10000;
  std::uint64_t record_count = 10000;
  KeyDistribution key_dist;
  std::uint32_t scan_len = 100;
  std::uint64_t seed = 1;
  std::uint32_t value_size = 100;

  double proportion(OpKind kind) const { return proportions[static_cast<std::size_t>(kind)]; }
  double& proportion(OpKind kind) { return proportions[static_cast<std::size_t>(kind)]; }

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

// Throws ValidationError naming the violated invariant.
void validate(const WorkloadSpec& spec);

using WorkloadVector = Eigen::Matrix<double, kOpKindCount, 1>;

struct Operation {
  OpKind kind = OpKind::Read;
  std::uint64_t key = 0;
  std::uint32_t scan_len = 0;     // scans only
  std::uint64_t value_seed = 0;   // writes only

  friend bool operator==(const Operation&, const Operation&) = default;
};

struct OpStream {
  std::vector<Operation> ops;
  std::uint64_t record_count = 0;
  std::uint32_t value_size = 100;
  std::uint32_t scan_len = 100;

  std::array<std::size_t, kOpKindCount> counts() const;
  friend bool operator==(const OpStream&, const OpStream&) = default;
};

// YCSB-style zipfian over [0, n), ranks scrambled with FNV so hot keys are
// spread across the key space.
class ZipfianGenerator {
 public:
  ZipfianGenerator(std::uint64_t n, double theta);
  template <typename Rng>
  std::uint64_t operator()(Rng& rng) const {
    return scramble(rank(rng.uniform()));
  }
  std::uint64_t rank(double u) const;
  std::uint64_t scramble(std::uint64_t rank) const;

 private:
  std::uint64_t n_;
  double theta_, zetan_, alpha_, eta_;
};

// Parses every `[section]` of key=value text. Keys before the first header
// form a section named "workload". All five proportion keys are required.
std::vector<WorkloadSpec> parse_workloads(std::string_view text);
// Exactly one section expected.
WorkloadSpec workload_parse(std::string_view text);
std::vector<WorkloadSpec> load_workloads(const std::filesystem::path& path);
std::string format_workload(const WorkloadSpec& spec);

OpStream workload_generate(const WorkloadSpec& spec);
WorkloadVector workload_vector(const WorkloadSpec& spec);
// Inverse of workload_vector on proportions; other fields come from base.
WorkloadSpec workload_from_vector(const WorkloadVector& v, WorkloadSpec base = {});
// Proportions uniform on the simplex (Dirichlet(1,1,1,1,1)).
WorkloadSpec workload_sample_random(std::uint64_t seed);

// Single-operation workloads in kAllOpKinds order.
std::vector<WorkloadSpec> pure_workloads();
// YCSB core workloads A-F.
std::vector<WorkloadSpec> ycsb_presets();

}  // namespace idxsel
