#pragma once

#include <string>
#include <vector>

#include "idxsel/env.hpp"
#include "idxsel/qnetwork.hpp"
#include "idxsel/rng.hpp"

namespace idxsel {

struct SelectionOptions {
  std::size_t episodes = 100;
  bool discounted = true;  // R += gamma^t * r; false gives R += r
  double gamma = 0.7;
};

struct VisitedConfig {
  IndexConfig config;
  double best_return = 0.0;
};

// Extension to the recorded candidate: where each rollout ended up and the
// throughput of the best config it touched.
struct EpisodeSummary {
  IndexConfig initial_config;
  IndexConfig best_config;  // highest throughput visited in the episode
  double best_throughput = 0.0;
  double episode_return = 0.0;
  std::size_t length = 0;
};

struct SelectionResult {
  IndexConfig optimal_config;
  double max_return = 0.0;
  std::size_t episodes_run = 0;
  std::vector<VisitedConfig> visited;  // sorted by config
  std::vector<EpisodeSummary> episodes;
};

// Greedy rollouts from random initial configs. Before each step the current
// config becomes the candidate when the return accumulated so far beats the
// best recorded one (which starts at -infinity).
SelectionResult select_optimal(const QNetwork& net, Environment& env, const WorkloadSpec& spec,
                               const SelectionOptions& options, Rng& rng);

struct ComparisonRow {
  std::string label;
  IndexConfig config;
  double throughput = 0.0;
  double improvement_pct = 0.0;  // selected over this row
};

struct SelectionReport {
  WorkloadSpec workload;
  IndexConfig selected;
  double selected_throughput = 0.0;
  std::vector<ComparisonRow> baselines;
  // Expected throughput of a config drawn like an episode's initial config.
  double random_mean_throughput = 0.0;
};

SelectionReport select_report(const SelectionResult& result, Environment& env,
                              const WorkloadSpec& spec, const std::vector<IndexConfig>& baselines);

// Default-parameter config of every enabled structure.
std::vector<IndexConfig> default_baselines(const ParamGrid& grid);

// Probability that `draws` independent draws with the given per-item
// probabilities hit every item at least once (inclusion-exclusion over
// subsets; items.size() must be at most 20).
double coverage_probability(const std::vector<double>& item_probabilities, std::size_t draws);

// Initial-config probabilities of Environment::random_config, in
// enumerate_configs order.
std::vector<double> initial_config_probabilities(const ParamGrid& grid);

}  // namespace idxsel
