#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "idxsel/agent.hpp"
#include "idxsel/env.hpp"
#include "idxsel/workload.hpp"

namespace idxsel {

enum class TrainScale : std::uint8_t { Desk, Paper };

std::string_view to_string(TrainScale scale);
TrainScale parse_train_scale(std::string_view text);

struct TrainConfig {
  std::size_t phase1_episodes = 1000;  // per pure workload
  std::size_t phase2_random_workloads = 150;
  std::size_t phase2_episodes = 300;  // per random workload
  Hyperparams hyperparams;
  std::uint64_t seed = 1;
  // Seeds the random phase-2 workloads; 0 derives them from seed.
  std::uint64_t workload_seed = 0;
  // Template for generated workloads (counts, distribution, value size).
  WorkloadSpec workload_base;

  // Paper: 1000 x 5 then 150 x 300 with the default hyperparameters. Desk:
  // 50 x 5 then 20 x 30 with a faster learning schedule.
  static TrainConfig for_scale(TrainScale scale);
  void validate() const;
};

struct EpisodeRecord {
  std::string workload;
  std::size_t length = 0;
  double total_reward = 0.0;
  IndexConfig initial_config;
  IndexConfig final_config;
  std::vector<double> losses;
};

struct TrainReport {
  std::vector<EpisodeRecord> episodes;
  std::size_t total_steps = 0;
  std::size_t updates = 0;
  double wall_seconds = 0.0;

  void append(const TrainReport& other);
};

// Runs episodes of the training loop against one environment, accumulating
// into a single agent so successive calls share the network and the pool.
class Trainer {
 public:
  Trainer(Environment env, const TrainConfig& config);
  Trainer(Environment env, const TrainConfig& config, QNetwork initial);

  // `episodes` episodes on spec, each from a random initial config.
  TrainReport train(const WorkloadSpec& spec, std::size_t episodes);

  // Phase 1: every pure workload for phase1_episodes, in order. Phase 2:
  // phase2_random_workloads fresh random workloads, phase2_episodes each.
  TrainReport train_curriculum();

  const DqnAgent& agent() const { return agent_; }
  DqnAgent& agent() { return agent_; }
  Environment& env() { return env_; }
  const TrainConfig& config() const { return config_; }

 private:
  EpisodeRecord run_episode(const WorkloadSpec& spec);

  Environment env_;
  TrainConfig config_;
  DqnAgent agent_;
  Rng reset_rng_;
  Rng policy_rng_;
  Rng replay_rng_;
  std::size_t total_steps_ = 0;
};

// The random workloads phase 2 trains on, reproducible from the config.
std::vector<WorkloadSpec> curriculum_random_workloads(const TrainConfig& config);

}  // namespace idxsel
