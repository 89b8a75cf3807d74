#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "idxsel/bench.hpp"
#include "idxsel/index_config.hpp"
#include "idxsel/rng.hpp"
#include "idxsel/workload.hpp"

namespace idxsel {

// s = {N, C}: workload proportions, structure one-hot, then one slot per
// parameter axis of every structure (axis_index / (len - 1), zero for
// inactive structures and single-value axes).
using EnvState = Eigen::VectorXd;

std::size_t state_dim(const ParamGrid& grid);
EnvState encode_state(const WorkloadVector& workload, const IndexConfig& config,
                      const ParamGrid& grid);
std::pair<WorkloadVector, IndexConfig> decode_state(const EnvState& state, const ParamGrid& grid);

struct Action {
  enum class Type : std::uint8_t { Keep, SwitchStructure, ParamUp, ParamDown };
  Type type = Type::Keep;
  StructureKind target = StructureKind::BTree;  // SwitchStructure
  std::size_t axis = 0;                         // ParamUp / ParamDown

  friend bool operator==(const Action&, const Action&) = default;
};

// Index layout: 0 Keep, 1..3 SwitchStructure(BTree, Hash, LsmTree), then
// ParamUp(j), ParamDown(j) pairs for j < grid.max_axis_count(). Axes the
// current structure lacks are masked out.
class ActionSpace {
 public:
  explicit ActionSpace(ParamGrid grid) : max_axes_(grid.max_axis_count()), grid_(std::move(grid)) {}

  std::size_t size() const { return 1 + kStructureCount + 2 * max_axes_; }
  Action decode(std::size_t index) const;
  std::size_t encode(const Action& action) const;
  std::vector<bool> legal(const IndexConfig& config) const;
  std::string describe(std::size_t index) const;

 private:
  std::size_t max_axes_;
  ParamGrid grid_;
};

// SwitchStructure (also to the current kind) lands on the target's
// midpoint parameters; parameter moves clamp at the grid edges.
IndexConfig apply_action(const IndexConfig& config, const Action& action, const ParamGrid& grid);

// r_t = ln((p_t - p_prev) / k + 1) - c_switch when p_t > p_prev,
//       -c_switch when p_t <= p_prev, and 0 when the state did not change.
double reward_eval(double p_t, double p_prev, bool switched, double k = 100.0,
                   double c_switch = 0.1);

// What p_{t-1} means inside an episode. Previous is the one-step difference;
// BestSoFar uses the best throughput seen in the episode so far, which
// removes the payoff of dropping to a poor config just to climb back.
enum class RewardBaseline : std::uint8_t { BestSoFar, Previous };

std::string_view to_string(RewardBaseline baseline);
RewardBaseline parse_reward_baseline(std::string_view text);

struct EnvConfig {
  double k = 100.0;
  double c_switch = 0.1;
  BenchMode mode = BenchMode::Simulated;
  RewardBaseline baseline = RewardBaseline::BestSoFar;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool terminal = false;
  IndexConfig config;       // decoded next_state
  double throughput = 0.0;  // p_t of config
};

struct TraceRow {
  std::size_t step = 0;
  EnvState state;
  std::size_t action = 0;
  double reward = 0.0;
  bool terminal = false;
};

// One episode at a time over a fixed workload. Throughputs are benchmarked
// once per (workload, config) and cached.
class Environment {
 public:
  explicit Environment(Bench bench = {}, EnvConfig config = {});

  // Structure uniform over enabled kinds, then each axis index uniform.
  IndexConfig random_config(Rng& rng) const;

  EnvState reset(const WorkloadSpec& spec, Rng& rng);
  EnvState reset(const WorkloadSpec& spec, const IndexConfig& initial);

  StepOutcome step(std::size_t action_index);
  StepOutcome step(const Action& action) { return step(actions_.encode(action)); }

  double throughput(const IndexConfig& config);

  const EnvState& state() const { return state_; }
  const IndexConfig& config() const { return config_; }
  const WorkloadSpec& workload() const { return spec_; }
  const std::vector<IndexConfig>& appeared() const { return appeared_; }
  bool done() const { return done_; }
  std::vector<bool> legal_actions() const { return actions_.legal(config_); }
  std::vector<bool> legal_actions(const EnvState& state) const;

  const ActionSpace& actions() const { return actions_; }
  const ParamGrid& grid() const { return bench_.grid(); }
  const Bench& bench() const { return bench_; }
  const EnvConfig& env_config() const { return config_opts_; }
  std::size_t state_dim() const { return idxsel::state_dim(grid()); }

  // Bound on steps per episode: every step but the last reaches a new config.
  std::size_t episode_step_bound() const { return grid().config_count() + 1; }

  const std::vector<TraceRow>& trace() const { return trace_; }
  void set_tracing(bool on) { tracing_ = on; }

 private:
  void load_workload(const WorkloadSpec& spec);

  Bench bench_;
  EnvConfig config_opts_;
  ActionSpace actions_;

  WorkloadSpec spec_;
  std::optional<OpStream> stream_;
  std::vector<std::optional<double>> throughput_cache_;

  EnvState state_;
  IndexConfig config_;
  double p_current_ = 0.0;
  double p_best_ = 0.0;
  std::vector<IndexConfig> appeared_;
  bool done_ = true;
  std::size_t steps_ = 0;

  bool tracing_ = false;
  std::vector<TraceRow> trace_;
};

}  // namespace idxsel
