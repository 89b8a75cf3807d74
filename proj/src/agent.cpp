#include "idxsel/agent.hpp"

#include <cmath>

namespace idxsel {

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (batch_size == 0 || target_sync_every == 0 || update_every_steps == 0 ||
      updates_per_step == 0 || replay_capacity == 0) {
    throw ConfigError("batch, sync, update cadence and replay capacity must be positive");
  }
  if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
  if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must lie in (0, 1]");
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::Sgd;
  if (text == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (want sgd|adam)");
}

std::size_t greedy_action(const Eigen::VectorXd& q, const std::vector<bool>& legal) {
  std::size_t best = q.size();
  for (Eigen::Index a = 0; a < q.size(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (!legal.empty() && !legal[i]) continue;
    if (best == static_cast<std::size_t>(q.size()) || q[a] > q[static_cast<Eigen::Index>(best)]) best = i;
  }
  if (best == static_cast<std::size_t>(q.size())) throw UsageError("no legal action");
  return best;
}

std::size_t policy_select(const QNetwork& net, const Eigen::VectorXd& state, double exploit,
                          Rng& rng, const std::vector<bool>& legal) {
  if (rng.uniform() < exploit) return greedy_action(net.forward(state), legal);
  const auto n = static_cast<std::size_t>(net.action_count());
  if (legal.empty()) return rng.below(n);
  std::vector<std::size_t> options;
  for (std::size_t a = 0; a < n; ++a) {
    if (legal[a]) options.push_back(a);
  }
  if (options.empty()) throw UsageError("no legal action");
  return options[rng.below(options.size())];
}

namespace {

std::vector<bool> legal_mask(std::uint32_t bits, Eigen::Index n) {
  std::vector<bool> mask(static_cast<std::size_t>(n));
  for (Eigen::Index a = 0; a < n; ++a) mask[static_cast<std::size_t>(a)] = a >= 32 || (bits >> a & 1U);
  return mask;
}

}  // namespace

double td_target(const QNetwork& target, const Transition& t, double gamma) {
  if (t.terminal) return t.reward;
  const Eigen::VectorXd q = target.forward(t.next_state);
  return t.reward + gamma * q[static_cast<Eigen::Index>(greedy_action(q, legal_mask(t.next_legal, q.size())))];
}

double td_loss(const QNetwork& net, const QNetwork& target, std::span<const Transition> batch,
               const Hyperparams& hp, QNetworkParams<double>* grad) {
  if (batch.empty()) throw UsageError("td_loss on an empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  QNetwork::Activations act;
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(net.action_count());
  for (const auto& t : batch) {
    if (static_cast<Eigen::Index>(t.action) >= net.action_count()) {
      throw DimensionError("transition action index exceeds the action set");
    }
    const double y = td_target(target, t, hp.gamma);
    const Eigen::VectorXd q = net.forward(t.state, act);
    const double err = q[static_cast<Eigen::Index>(t.action)] - y;
    double derr = 0.0;
    if (hp.loss == LossKind::Mse || std::abs(err) <= hp.huber_delta) {
      loss += hp.loss == LossKind::Mse ? err * err : 0.5 * err * err;
      derr = hp.loss == LossKind::Mse ? 2.0 * err : err;
    } else {
      loss += hp.huber_delta * (std::abs(err) - 0.5 * hp.huber_delta);
      derr = hp.huber_delta * (err > 0 ? 1.0 : -1.0);
    }
    if (grad) {
      dq.setZero();
      dq[static_cast<Eigen::Index>(t.action)] = derr * scale;
      net.backward(act, dq, *grad);
    }
  }
  return loss * scale;
}

void Optimizer::step(QNetworkParams<double>& params, const QNetworkParams<double>& grad) {
  std::vector<const double*> g;
  std::vector<Eigen::Index> sizes;
  grad.for_each_tensor([&](const double* p, Eigen::Index n) {
    g.push_back(p);
    sizes.push_back(n);
  });

  if (kind_ == OptimizerKind::Sgd) {
    std::size_t k = 0;
    params.for_each_tensor([&](double* p, Eigen::Index n) {
      for (Eigen::Index i = 0; i < n; ++i) p[i] -= lr_ * g[k][i];
      ++k;
    });
  } else {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (m_.empty()) {
      const auto total = static_cast<std::size_t>(params.parameter_count());
      m_.assign(total, 0.0);
      v_.assign(total, 0.0);
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    std::size_t k = 0, flat = 0;
    params.for_each_tensor([&](double* p, Eigen::Index n) {
      for (Eigen::Index i = 0; i < n; ++i, ++flat) {
        m_[flat] = beta1 * m_[flat] + (1.0 - beta1) * g[k][i];
        v_[flat] = beta2 * v_[flat] + (1.0 - beta2) * g[k][i] * g[k][i];
        p[i] -= lr_ * (m_[flat] / c1) / (std::sqrt(v_[flat] / c2) + eps);
      }
      ++k;
    });
  }
  lr_ *= decay_;
}

double qnet_backward(QNetwork& net, std::span<const Transition> batch, const QNetwork& target,
                     const Hyperparams& hp, Optimizer& optimizer) {
  auto grad = net.zero_like();
  const double loss = td_loss(net, target, batch, hp, &grad);
  if (!std::isfinite(loss)) throw TrainingFault("non-finite TD loss");
  optimizer.step(net.params(), grad);
  if (!net.params().all_finite()) throw TrainingFault("non-finite weights after update");
  return loss;
}

DqnAgent::DqnAgent(Eigen::Index state_dim, Eigen::Index action_count, Hyperparams hp,
                   std::uint64_t seed)
    : hp_(std::move(hp)),
      online_(state_dim, hp_.hidden, action_count),
      pool_(hp_.replay_capacity),
      optimizer_(hp_) {
  hp_.validate();
  Rng rng(seed);
  online_.initialize(rng);
  target_ = online_;
}

DqnAgent::DqnAgent(QNetwork net, Hyperparams hp, std::uint64_t)
    : hp_(std::move(hp)), online_(std::move(net)), target_(online_), pool_(hp_.replay_capacity),
      optimizer_(hp_) {
  hp_.validate();
}

std::optional<double> DqnAgent::on_step(Rng& rng) {
  ++steps_;
  if (steps_ % hp_.update_every_steps != 0) return std::nullopt;
  std::optional<double> loss;
  for (std::size_t i = 0; i < hp_.updates_per_step; ++i) {
    const auto batch = pool_.sample(hp_.batch_size, rng);
    if (!batch) return loss;
    loss = qnet_backward(online_, *batch, target_, hp_, optimizer_);
    ++updates_;
    if (updates_ % hp_.target_sync_every == 0) sync_target();
  }
  return loss;
}

}  // namespace idxsel
