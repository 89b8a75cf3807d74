#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "idxsel/qnetwork.hpp"
#include "idxsel/replay_pool.hpp"
#include "idxsel/rng.hpp"

namespace idxsel {

enum class OptimizerKind : std::uint8_t { Sgd = 0, Adam = 1 };
enum class LossKind : std::uint8_t { Mse = 0, Huber = 1 };

struct Hyperparams {
  double learning_rate = 0.001;
  double gamma = 0.7;
  // Probability of taking the greedy action (see epsilon_is_exploit).
  double epsilon = 0.7;
  // When false, epsilon is the exploration probability instead.
  bool epsilon_is_exploit = true;
  std::size_t batch_size = 32;
  std::size_t target_sync_every = 200;  // gradient updates
  std::size_t update_every_steps = 5;   // env steps
  std::size_t updates_per_step = 1;     // gradient updates per update event
  std::size_t replay_capacity = 50000;
  std::vector<Eigen::Index> hidden = {16, 8, 8};
  OptimizerKind optimizer = OptimizerKind::Sgd;
  LossKind loss = LossKind::Mse;
  double huber_delta = 1.0;
  // Multiplies learning_rate after every update; 1 keeps it constant.
  double lr_decay = 1.0;

  double exploit_probability() const { return epsilon_is_exploit ? epsilon : 1.0 - epsilon; }
  void validate() const;
};

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

// With probability exploit returns the greedy legal action (lowest index on
// ties), otherwise a uniformly random legal action.
std::size_t policy_select(const QNetwork& net, const Eigen::VectorXd& state, double exploit,
                          Rng& rng, const std::vector<bool>& legal = {});

std::size_t greedy_action(const Eigen::VectorXd& q, const std::vector<bool>& legal = {});

// y = r for terminal transitions, else r + gamma * max_legal Q_target(s', .).
double td_target(const QNetwork& target, const Transition& t, double gamma);

// Mean TD loss over the batch. When grad is non-null the loss gradient with
// respect to net's parameters is accumulated into it.
double td_loss(const QNetwork& net, const QNetwork& target, std::span<const Transition> batch,
               const Hyperparams& hp, QNetworkParams<double>* grad = nullptr);

class Optimizer {
 public:
  explicit Optimizer(const Hyperparams& hp) : kind_(hp.optimizer), lr_(hp.learning_rate), decay_(hp.lr_decay) {}

  void step(QNetworkParams<double>& params, const QNetworkParams<double>& grad);
  double learning_rate() const { return lr_; }

 private:
  OptimizerKind kind_;
  double lr_;
  double decay_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

// One gradient step on net from the batch; returns the pre-step loss.
// Throws TrainingFault on a non-finite loss or weights.
double qnet_backward(QNetwork& net, std::span<const Transition> batch, const QNetwork& target,
                     const Hyperparams& hp, Optimizer& optimizer);

// Online network, target network, replay pool and update cadence.
class DqnAgent {
 public:
  DqnAgent(Eigen::Index state_dim, Eigen::Index action_count, Hyperparams hp, std::uint64_t seed);
  DqnAgent(QNetwork net, Hyperparams hp, std::uint64_t seed);

  std::size_t act(const Eigen::VectorXd& state, const std::vector<bool>& legal, Rng& rng) const {
    return policy_select(online_, state, hp_.exploit_probability(), rng, legal);
  }
  std::size_t greedy(const Eigen::VectorXd& state, const std::vector<bool>& legal) const {
    return greedy_action(online_.forward(state), legal);
  }

  void remember(Transition t) { pool_.push(std::move(t)); }

  // Call once per environment step. Every update_every_steps steps, once the
  // pool holds batch_size transitions, runs updates_per_step updates on fresh
  // batches; the target network syncs every target_sync_every updates.
  // Returns the last loss when an update ran.
  std::optional<double> on_step(Rng& rng);

  void sync_target() { target_sync(online_, target_); }

  const QNetwork& online() const { return online_; }
  QNetwork& online() { return online_; }
  const QNetwork& target() const { return target_; }
  const ReplayPool& pool() const { return pool_; }
  const Hyperparams& hyperparams() const { return hp_; }
  std::size_t updates() const { return updates_; }
  std::size_t steps() const { return steps_; }

 private:
  Hyperparams hp_;
  QNetwork online_;
  QNetwork target_;
  ReplayPool pool_;
  Optimizer optimizer_;
  std::size_t steps_ = 0;
  std::size_t updates_ = 0;
};

}  // namespace idxsel
