#include "idxsel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "idxsel/agent.hpp"
#include "idxsel/errors.hpp"

namespace idxsel {

SelectionResult select_optimal(const QNetwork& net, Environment& env, const WorkloadSpec& spec,
                               const SelectionOptions& options, Rng& rng) {
  if (options.episodes == 0) throw ValidationError("selection needs at least one episode");
  if (net.input_dim() != static_cast<Eigen::Index>(env.state_dim())) {
    throw DimensionError("checkpoint state dimension " + std::to_string(net.input_dim()) +
                         " does not match the environment's " + std::to_string(env.state_dim()));
  }
  if (net.action_count() != static_cast<Eigen::Index>(env.actions().size())) {
    throw DimensionError("checkpoint action count does not match the environment");
  }

  SelectionResult result;
  result.max_return = -std::numeric_limits<double>::infinity();
  std::map<IndexConfig, double> visited;

  for (std::size_t e = 0; e < options.episodes; ++e) {
    EnvState s = env.reset(spec, rng);
    EpisodeSummary summary;
    summary.initial_config = env.config();
    summary.best_config = env.config();
    summary.best_throughput = env.throughput(env.config());
    double R = 0.0;
    double discount = 1.0;
    while (!env.done()) {
      const IndexConfig& current = env.config();
      if (result.max_return < R) {
        result.max_return = R;
        result.optimal_config = current;
      }
      auto [it, fresh] = visited.try_emplace(current, R);
      if (!fresh) it->second = std::max(it->second, R);

      const std::size_t a = greedy_action(net.forward(s), env.legal_actions());
      StepOutcome out = env.step(a);
      R += (options.discounted ? discount : 1.0) * out.reward;
      discount *= options.gamma;
      if (out.throughput > summary.best_throughput) {
        summary.best_throughput = out.throughput;
        summary.best_config = out.config;
      }
      ++summary.length;
      s = std::move(out.next_state);
    }
    summary.episode_return = R;
    result.episodes.push_back(summary);
    ++result.episodes_run;
  }
  for (const auto& [config, ret] : visited) result.visited.push_back({config, ret});
  return result;
}

std::vector<IndexConfig> default_baselines(const ParamGrid& grid) {
  std::vector<IndexConfig> out;
  for (auto kind : kAllStructures) {
    if (grid.enabled(kind)) out.push_back(default_config(kind, grid));
  }
  return out;
}

std::vector<double> initial_config_probabilities(const ParamGrid& grid) {
  std::size_t kinds = 0;
  for (auto kind : kAllStructures) kinds += grid.enabled(kind) ? 1 : 0;
  std::vector<double> p;
  for (const auto& config : enumerate_configs(grid)) {
    p.push_back(1.0 / static_cast<double>(kinds) /
                static_cast<double>(grid.config_count(config.kind)));
  }
  return p;
}

SelectionReport select_report(const SelectionResult& result, Environment& env,
                              const WorkloadSpec& spec, const std::vector<IndexConfig>& baselines) {
  if (result.episodes_run == 0) throw ValidationError("selection result has no candidate");
  SelectionReport report;
  report.workload = spec;
  report.selected = result.optimal_config;
  // Throughputs all come from the environment's cache over one stream.
  env.reset(spec, result.optimal_config);
  report.selected_throughput = env.throughput(result.optimal_config);
  for (const auto& config : baselines) {
    ComparisonRow row;
    row.label = std::string(to_string(config.kind));
    row.config = config;
    row.throughput = env.throughput(config);
    row.improvement_pct = (report.selected_throughput - row.throughput) / row.throughput * 100.0;
    report.baselines.push_back(row);
  }
  const auto configs = enumerate_configs(env.grid());
  const auto probs = initial_config_probabilities(env.grid());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    report.random_mean_throughput += probs[i] * env.throughput(configs[i]);
  }
  return report;
}

double coverage_probability(const std::vector<double>& p, std::size_t draws) {
  const std::size_t n = p.size();
  if (n > 20) throw DomainError("coverage_probability supports at most 20 items");
  // P(all hit) = sum over subsets S of (-1)^|S| (1 - p(S))^draws.
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double missed = 0.0;
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        missed += p[i];
        ++bits;
      }
    }
    const double term = std::pow(std::max(0.0, 1.0 - missed), static_cast<double>(draws));
    total += (bits % 2 == 0) ? term : -term;
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace idxsel
