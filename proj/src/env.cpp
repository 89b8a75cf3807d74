#include "idxsel/env.hpp"

#include <algorithm>
#include <cmath>

#include "idxsel/errors.hpp"

namespace idxsel {

std::size_t state_dim(const ParamGrid& grid) {
  return kOpKindCount + kStructureCount + grid.total_axis_count();
}

EnvState encode_state(const WorkloadVector& workload, const IndexConfig& config,
                      const ParamGrid& grid) {
  validate_config(config, grid);
  EnvState s = EnvState::Zero(static_cast<Eigen::Index>(state_dim(grid)));
  s.head<kOpKindCount>() = workload;
  s[kOpKindCount + static_cast<Eigen::Index>(config.kind)] = 1.0;
  const auto base = static_cast<Eigen::Index>(kOpKindCount + kStructureCount +
                                              grid.slot_offset(config.kind));
  const auto& axes = grid.axes(config.kind);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto len = axes[i].values.size();
    s[base + static_cast<Eigen::Index>(i)] =
        len > 1 ? static_cast<double>(config.params[i]) / static_cast<double>(len - 1) : 0.0;
  }
  return s;
}

std::pair<WorkloadVector, IndexConfig> decode_state(const EnvState& state, const ParamGrid& grid) {
  if (static_cast<std::size_t>(state.size()) != state_dim(grid)) {
    throw DimensionError("state has dimension " + std::to_string(state.size()) + ", expected " +
                         std::to_string(state_dim(grid)));
  }
  WorkloadVector workload = state.head<kOpKindCount>();
  Eigen::Index kind_index = 0;
  state.segment<kStructureCount>(kOpKindCount).maxCoeff(&kind_index);
  IndexConfig config{static_cast<StructureKind>(kind_index), {}};
  const auto base = static_cast<Eigen::Index>(kOpKindCount + kStructureCount +
                                              grid.slot_offset(config.kind));
  const auto& axes = grid.axes(config.kind);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto len = static_cast<double>(axes[i].values.size() - 1);
    config.params.push_back(
        static_cast<std::size_t>(std::lround(state[base + static_cast<Eigen::Index>(i)] * len)));
  }
  validate_config(config, grid);
  return {workload, config};
}

Action ActionSpace::decode(std::size_t index) const {
  if (index >= size()) throw UsageError("action index " + std::to_string(index) + " out of range");
  if (index == 0) return {};
  if (index <= kStructureCount) {
    return {Action::Type::SwitchStructure, static_cast<StructureKind>(index - 1), 0};
  }
  const std::size_t rel = index - 1 - kStructureCount;
  return {rel % 2 == 0 ? Action::Type::ParamUp : Action::Type::ParamDown, StructureKind::BTree,
          rel / 2};
}

std::size_t ActionSpace::encode(const Action& action) const {
  switch (action.type) {
    case Action::Type::Keep: return 0;
    case Action::Type::SwitchStructure: return 1 + static_cast<std::size_t>(action.target);
    case Action::Type::ParamUp:
    case Action::Type::ParamDown:
      if (action.axis >= max_axes_) throw UsageError("action axis out of range");
      return 1 + kStructureCount + 2 * action.axis +
             (action.type == Action::Type::ParamDown ? 1 : 0);
  }
  throw UsageError("unknown action type");
}

std::vector<bool> ActionSpace::legal(const IndexConfig& config) const {
  std::vector<bool> mask(size(), false);
  mask[0] = true;
  for (auto kind : kAllStructures) mask[1 + static_cast<std::size_t>(kind)] = grid_.enabled(kind);
  for (std::size_t axis = 0; axis < grid_.axis_count(config.kind); ++axis) {
    mask[1 + kStructureCount + 2 * axis] = true;
    mask[2 + kStructureCount + 2 * axis] = true;
  }
  return mask;
}

std::string ActionSpace::describe(std::size_t index) const {
  const Action a = decode(index);
  switch (a.type) {
    case Action::Type::Keep: return "keep";
    case Action::Type::SwitchStructure: return "switch:" + std::string(to_string(a.target));
    case Action::Type::ParamUp: return "up:" + std::to_string(a.axis);
    case Action::Type::ParamDown: return "down:" + std::to_string(a.axis);
  }
  return "?";
}

IndexConfig apply_action(const IndexConfig& config, const Action& action, const ParamGrid& grid) {
  switch (action.type) {
    case Action::Type::Keep: return config;
    case Action::Type::SwitchStructure:
      if (!grid.enabled(action.target)) throw UsageError("switch to a structure not in the grid");
      return default_config(action.target, grid);
    case Action::Type::ParamUp:
    case Action::Type::ParamDown: {
      if (action.axis >= grid.axis_count(config.kind)) {
        throw UsageError("parameter move on an axis the structure does not have");
      }
      IndexConfig next = config;
      auto& p = next.params[action.axis];
      const auto len = grid.axes(config.kind)[action.axis].values.size();
      if (action.type == Action::Type::ParamUp) {
        p = std::min(p + 1, len - 1);
      } else if (p > 0) {
        --p;
      }
      return next;
    }
  }
  throw UsageError("unknown action type");
}

double reward_eval(double p_t, double p_prev, bool switched, double k, double c_switch) {
  if (!(p_t > 0.0) || !(p_prev > 0.0) || !std::isfinite(p_t) || !std::isfinite(p_prev)) {
    throw DomainError("reward: throughputs must be positive and finite");
  }
  if (!switched) return 0.0;
  const double time_reward = p_t > p_prev ? std::log((p_t - p_prev) / k + 1.0) : 0.0;
  return time_reward - c_switch;
}

std::string_view to_string(RewardBaseline baseline) {
  return baseline == RewardBaseline::BestSoFar ? "best" : "previous";
}

RewardBaseline parse_reward_baseline(std::string_view text) {
  if (text == "best") return RewardBaseline::BestSoFar;
  if (text == "previous") return RewardBaseline::Previous;
  throw ConfigError("unknown reward baseline '" + std::string(text) + "' (want best|previous)");
}

Environment::Environment(Bench bench, EnvConfig config)
    : bench_(std::move(bench)), config_opts_(config), actions_(bench_.grid()) {
  if (!(config_opts_.k > 0.0)) throw ConfigError("reward constant k must be positive");
  if (!(config_opts_.c_switch >= 0.0)) throw ConfigError("c_switch must be non-negative");
}

IndexConfig Environment::random_config(Rng& rng) const {
  std::vector<StructureKind> kinds;
  for (auto kind : kAllStructures) {
    if (grid().enabled(kind)) kinds.push_back(kind);
  }
  IndexConfig c{kinds[rng.below(kinds.size())], {}};
  for (const auto& axis : grid().axes(c.kind)) c.params.push_back(rng.below(axis.values.size()));
  return c;
}

void Environment::load_workload(const WorkloadSpec& spec) {
  if (stream_ && spec == spec_) return;
  validate(spec);
  spec_ = spec;
  stream_ = workload_generate(spec);
  throughput_cache_.assign(grid().config_count(), std::nullopt);
}

double Environment::throughput(const IndexConfig& config) {
  if (!stream_) throw UsageError("environment has no workload; call reset first");
  auto& slot = throughput_cache_[config_ordinal(config, grid())];
  if (!slot) slot = bench_.run(config, *stream_, config_opts_.mode).throughput;
  return *slot;
}

EnvState Environment::reset(const WorkloadSpec& spec, Rng& rng) {
  load_workload(spec);
  return reset(spec, random_config(rng));
}

EnvState Environment::reset(const WorkloadSpec& spec, const IndexConfig& initial) {
  load_workload(spec);
  validate_config(initial, grid());
  config_ = initial;
  state_ = encode_state(workload_vector(spec_), config_, grid());
  p_current_ = p_best_ = throughput(config_);
  appeared_.clear();
  trace_.clear();
  steps_ = 0;
  done_ = false;
  return state_;
}

std::vector<bool> Environment::legal_actions(const EnvState& state) const {
  return actions_.legal(decode_state(state, grid()).second);
}

StepOutcome Environment::step(std::size_t action_index) {
  if (done_) throw UsageError("step after terminal state; call reset");
  if (!actions_.legal(config_).at(action_index)) {
    throw UsageError("illegal action " + actions_.describe(action_index) + " for " +
                     format_config(config_, grid()));
  }
  appeared_.push_back(config_);

  StepOutcome out;
  out.config = apply_action(config_, actions_.decode(action_index), grid());
  out.next_state = encode_state(workload_vector(spec_), out.config, grid());
  out.throughput = throughput(out.config);
  const bool switched = out.config != config_;
  const double reference =
      config_opts_.baseline == RewardBaseline::BestSoFar ? p_best_ : p_current_;
  out.reward = reward_eval(out.throughput, reference, switched, config_opts_.k,
                           config_opts_.c_switch);
  out.terminal = std::find(appeared_.begin(), appeared_.end(), out.config) != appeared_.end();

  if (tracing_) trace_.push_back({steps_, state_, action_index, out.reward, out.terminal});
  ++steps_;
  config_ = out.config;
  state_ = out.next_state;
  p_current_ = out.throughput;
  p_best_ = std::max(p_best_, out.throughput);
  done_ = out.terminal;
  return out;
}

}  // namespace idxsel
