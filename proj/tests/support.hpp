#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "idxsel/agent.hpp"
#include "idxsel/qnetwork.hpp"
#include "idxsel/replay_pool.hpp"
#include "idxsel/rng.hpp"

namespace idxsel::testing {

inline QNetwork random_net(Rng& rng, Eigen::Index in, std::vector<Eigen::Index> hidden,
                           Eigen::Index actions) {
  QNetwork net(in, std::move(hidden), actions);
  net.initialize(rng);
  // Non-zero biases so every parameter has a gradient path.
  net.params().for_each_tensor([&](double* p, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p[i] == 0.0) p[i] = 0.5 * (rng.uniform() - 0.5);
    }
  });
  return net;
}

inline std::vector<Transition> random_batch(Rng& rng, Eigen::Index in, std::size_t actions,
                                            std::size_t size) {
  std::vector<Transition> batch;
  for (std::size_t i = 0; i < size; ++i) {
    Transition t;
    t.state = Eigen::VectorXd::NullaryExpr(in, [&] { return rng.uniform() * 2.0 - 1.0; });
    t.next_state = Eigen::VectorXd::NullaryExpr(in, [&] { return rng.uniform() * 2.0 - 1.0; });
    t.action = rng.below(actions);
    t.reward = rng.uniform() * 2.0 - 1.0;
    t.terminal = rng.below(3) == 0;
    batch.push_back(std::move(t));
  }
  return batch;
}

// Smallest |pre-activation| over the trunk for every state in the batch.
inline double kink_margin(const QNetwork& net, const std::vector<Transition>& batch) {
  double margin = INFINITY;
  QNetwork::Activations act;
  for (const auto& t : batch) {
    net.forward(t.state, act);
    for (const auto& z : act.pre) margin = std::min(margin, z.cwiseAbs().minCoeff());
  }
  return margin;
}

// Largest relative disagreement between the analytic TD-loss gradient and
// central differences. nullopt when a perturbation could cross a ReLU kink.
inline std::optional<double> gradient_error(QNetwork net, const QNetwork& target,
                                            const std::vector<Transition>& batch,
                                            const Hyperparams& hp, double h = 1e-5) {
  if (kink_margin(net, batch) < 1e-3) return std::nullopt;
  auto grad = net.zero_like();
  td_loss(net, target, batch, hp, &grad);
  std::vector<double> analytic;
  grad.for_each_tensor([&](const double* p, Eigen::Index n) { analytic.insert(analytic.end(), p, p + n); });

  std::vector<double*> slots;
  net.params().for_each_tensor([&](double* p, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) slots.push_back(p + i);
  });
  double worst = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + h;
    const double up = td_loss(net, target, batch, hp);
    *slots[i] = saved - h;
    const double down = td_loss(net, target, batch, hp);
    *slots[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace idxsel::testing
