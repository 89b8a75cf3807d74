#include "idxsel/trainer.hpp"

#include <chrono>

#include "idxsel/errors.hpp"

namespace idxsel {

std::string_view to_string(TrainScale scale) {
  return scale == TrainScale::Desk ? "desk" : "paper";
}

TrainScale parse_train_scale(std::string_view text) {
  if (text == "desk") return TrainScale::Desk;
  if (text == "paper") return TrainScale::Paper;
  throw ConfigError("unknown scale '" + std::string(text) + "' (expected desk or paper)");
}

TrainConfig TrainConfig::for_scale(TrainScale scale) {
  TrainConfig c;
  if (scale == TrainScale::Desk) {
    c.phase1_episodes = 50;
    c.phase2_random_workloads = 20;
    c.phase2_episodes = 30;
    // About 3000 env steps: learn on every step, several batches each.
    c.hyperparams.learning_rate = 0.01;
    c.hyperparams.update_every_steps = 1;
    c.hyperparams.updates_per_step = 8;
  }
  return c;
}

void TrainConfig::validate() const { hyperparams.validate(); }

void TrainReport::append(const TrainReport& other) {
  episodes.insert(episodes.end(), other.episodes.begin(), other.episodes.end());
  total_steps += other.total_steps;
  updates += other.updates;
  wall_seconds += other.wall_seconds;
}

namespace {

DqnAgent make_agent(const Environment& env, const TrainConfig& config) {
  return DqnAgent(static_cast<Eigen::Index>(env.state_dim()),
                  static_cast<Eigen::Index>(env.actions().size()), config.hyperparams,
                  Rng::mix(config.seed ^ 0x6e6574ULL));
}

}  // namespace

Trainer::Trainer(Environment env, const TrainConfig& config)
    : Trainer(env, config, make_agent(env, config).online()) {}

Trainer::Trainer(Environment env, const TrainConfig& config, QNetwork initial)
    : env_(std::move(env)),
      config_(config),
      agent_(std::move(initial), config.hyperparams, Rng::mix(config.seed ^ 0x6e6574ULL)),
      reset_rng_(Rng::mix(config.seed ^ 0x7265736574ULL)),
      policy_rng_(Rng::mix(config.seed ^ 0x706f6cULL)),
      replay_rng_(Rng::mix(config.seed ^ 0x7265706cULL)) {
  config_.validate();
  if (agent_.online().input_dim() != static_cast<Eigen::Index>(env_.state_dim()) ||
      agent_.online().action_count() != static_cast<Eigen::Index>(env_.actions().size())) {
    throw DimensionError("network shape does not match the environment");
  }
}

EpisodeRecord Trainer::run_episode(const WorkloadSpec& spec) {
  EpisodeRecord rec;
  rec.workload = spec.name;
  EnvState s = env_.reset(spec, reset_rng_);
  rec.initial_config = env_.config();
  const std::size_t bound = env_.episode_step_bound();
  while (!env_.done()) {
    const auto legal = env_.legal_actions();
    const std::size_t a = agent_.act(s, legal, policy_rng_);
    StepOutcome out = env_.step(a);
    Transition t;
    t.state = s;
    t.action = a;
    t.reward = out.reward;
    t.next_state = out.next_state;
    t.terminal = out.terminal;
    t.next_legal = legal_bits(env_.actions().legal(out.config));
    agent_.remember(std::move(t));
    if (auto loss = agent_.on_step(replay_rng_)) rec.losses.push_back(*loss);
    rec.total_reward += out.reward;
    ++rec.length;
    s = std::move(out.next_state);
    if (rec.length > bound) throw TrainingFault("episode exceeded its step bound");
  }
  rec.final_config = env_.config();
  return rec;
}

TrainReport Trainer::train(const WorkloadSpec& spec, std::size_t episodes) {
  idxsel::validate(spec);
  TrainReport report;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t updates_before = agent_.updates();
  for (std::size_t e = 0; e < episodes; ++e) {
    report.episodes.push_back(run_episode(spec));
    report.total_steps += report.episodes.back().length;
  }
  total_steps_ += report.total_steps;
  report.updates = agent_.updates() - updates_before;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<WorkloadSpec> curriculum_random_workloads(const TrainConfig& config) {
  const std::uint64_t base = config.workload_seed != 0 ? config.workload_seed
                                                       : Rng::mix(config.seed ^ 0x776bULL);
  std::vector<WorkloadSpec> out;
  out.reserve(config.phase2_random_workloads);
  for (std::size_t i = 0; i < config.phase2_random_workloads; ++i) {
    const auto sampled = workload_sample_random(base + i);
    WorkloadSpec spec = config.workload_base;
    spec.name = sampled.name;
    spec.proportions = sampled.proportions;
    spec.seed = sampled.seed;
    out.push_back(std::move(spec));
  }
  return out;
}

TrainReport Trainer::train_curriculum() {
  TrainReport report;
  for (auto pure : pure_workloads()) {
    WorkloadSpec spec = config_.workload_base;
    spec.name = pure.name;
    spec.proportions = pure.proportions;
    report.append(train(spec, config_.phase1_episodes));
  }
  for (const auto& spec : curriculum_random_workloads(config_)) {
    report.append(train(spec, config_.phase2_episodes));
  }
  return report;
}

}  // namespace idxsel
