#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "idxsel/cost_model.hpp"
#include "idxsel/index.hpp"
#include "idxsel/index_config.hpp"
#include "idxsel/workload.hpp"

namespace idxsel {

enum class BenchMode : std::uint8_t { Simulated, Measured };

std::string_view to_string(BenchMode mode);
BenchMode parse_bench_mode(std::string_view text);

struct BenchResult {
  double throughput = 0.0;       // ops per second
  double elapsed_seconds = 0.0;  // wall clock (Measured) or modeled (Simulated)
  std::array<std::size_t, kOpKindCount> per_kind_counts{};
  BenchMode mode = BenchMode::Simulated;

  friend bool operator==(const BenchResult&, const BenchResult&) = default;
};

// Runs op streams against freshly built, preloaded indexes.
class Bench {
 public:
  Bench() = default;
  Bench(ParamGrid grid, CostModel model, IndexOptions options = {})
      : grid_(std::move(grid)), model_(model), options_(options) {}

  // Simulated: pure function of (config, stream). Measured: wall-clock time
  // of the stream on one thread, preload excluded.
  BenchResult run(const IndexConfig& config, const OpStream& stream, BenchMode mode) const;

  // One result per config, all on the stream generated from spec.
  std::vector<BenchResult> compare(const std::vector<IndexConfig>& configs,
                                   const WorkloadSpec& spec, BenchMode mode) const;

  const ParamGrid& grid() const { return grid_; }
  const CostModel& model() const { return model_; }

 private:
  BenchResult simulate(const IndexConfig& config, const OpStream& stream) const;
  BenchResult measure(const IndexConfig& config, const OpStream& stream) const;

  ParamGrid grid_;
  CostModel model_;
  IndexOptions options_;
};

// Preload used by Measured runs: keys 0..record_count-1.
std::vector<Record> preload_records(std::uint64_t record_count, std::uint32_t value_size);

}  // namespace idxsel
