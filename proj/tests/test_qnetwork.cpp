#include <doctest.h>

#include "idxsel/errors.hpp"
#include "idxsel/qnetwork.hpp"
#include "support.hpp"

using namespace idxsel;
using idxsel::testing::gradient_error;
using idxsel::testing::random_batch;
using idxsel::testing::random_net;

TEST_CASE("shape and defaults") {
  QNetwork net(12, {16, 8, 8}, 8);
  CHECK(net.input_dim() == 12);
  CHECK(net.action_count() == 8);
  CHECK(net.hidden() == std::vector<Eigen::Index>{16, 8, 8});
  CHECK(net.params().parameter_count() == 12 * 16 + 16 + 16 * 8 + 8 + 8 * 8 + 8 + 8 + 1 + 8 * 8 + 8);
  CHECK_THROWS_AS(QNetwork(0, {4}, 2), DimensionError);
  CHECK_THROWS_AS(QNetwork(3, {}, 2), DimensionError);
  CHECK_THROWS_AS(QNetwork(3, {0}, 2), DimensionError);
  CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(11)), DimensionError);
}

TEST_CASE("zero network outputs zero") {
  QNetwork net(12, {16, 8, 8}, 8);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(12, [&] { return rng.uniform(); });
    CHECK(net.forward(s).isZero(0.0));
  }
}

TEST_CASE("identical advantages give Q = V") {
  Rng rng(2);
  QNetwork net = random_net(rng, 5, {6, 4}, 7);
  net.params().advantage.weight.setZero();
  net.params().advantage.bias.setConstant(3.5);
  QNetwork::Activations act;
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(5, 0.3);
  const Eigen::VectorXd q = net.forward(s, act);
  for (Eigen::Index a = 0; a < q.size(); ++a) CHECK(q[a] == doctest::Approx(act.value).epsilon(1e-14));
}

TEST_CASE("aggregation is invariant to constant advantage shifts") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    QNetwork net = random_net(rng, 12, {16, 8, 8}, 8);
    QNetwork shifted = net;
    shifted.params().advantage.bias.array() += rng.uniform() * 200.0 - 100.0;
    const Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(12, [&] { return rng.uniform(); });
    QNetwork::Activations act;
    const Eigen::VectorXd q = net.forward(s, act);
    CHECK((q - shifted.forward(s)).cwiseAbs().maxCoeff() < 1e-9);
    // max_a |Q - V - A + mean A| = 0.
    const Eigen::VectorXd resid = q.array() - act.value - act.advantage.array() + act.advantage.mean();
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("forward is deterministic") {
  Rng rng(4);
  QNetwork net = random_net(rng, 12, {16, 8, 8}, 8);
  const Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(12, [&] { return rng.uniform(); });
  CHECK(net.forward(s) == net.forward(s));
}

TEST_CASE("analytic gradients match central differences") {
  Hyperparams hp;
  SUBCASE("2-2-2 nets") {
    Rng rng(5);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 100; ++trial) {
      const QNetwork net = random_net(rng, 2, {2}, 2);
      const QNetwork target = random_net(rng, 2, {2}, 2);
      const auto batch = random_batch(rng, 2, 2, 4);
      const auto err = gradient_error(net, target, batch, hp);
      if (!err) continue;
      ++checked;
      CHECK(*err < 1e-4);
    }
    CHECK(checked == 100);
  }
  SUBCASE("deeper nets and huber loss") {
    Rng rng(6);
    hp.loss = LossKind::Huber;
    hp.huber_delta = 0.5;
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 20; ++trial) {
      const QNetwork net = random_net(rng, 4, {5, 3, 3}, 3);
      const QNetwork target = random_net(rng, 4, {5, 3, 3}, 3);
      const auto batch = random_batch(rng, 4, 3, 3);
      const auto err = gradient_error(net, target, batch, hp);
      if (!err) continue;
      ++checked;
      CHECK(*err < 1e-4);
    }
    CHECK(checked == 20);
  }
}

TEST_CASE("terminal zero-reward batch on a zero net has zero loss") {
  QNetwork net(3, {4}, 2);
  std::vector<Transition> batch(5);
  for (auto& t : batch) {
    t.state = Eigen::VectorXd::Ones(3);
    t.next_state = Eigen::VectorXd::Ones(3);
    t.terminal = true;
  }
  Hyperparams hp;
  Optimizer opt(hp);
  CHECK(qnet_backward(net, batch, net, hp, opt) == 0.0);
  CHECK(net.params().parameter_count() > 0);
  CHECK_THROWS_AS(td_loss(net, net, std::span<const Transition>{}, hp), UsageError);
}

TEST_CASE("repeated updates on one transition close the TD gap") {
  Rng rng(8);
  QNetwork net = random_net(rng, 4, {8, 4}, 3);
  const QNetwork target = net;
  Transition t;
  t.state = Eigen::Vector4d(0.2, 0.1, 0.9, 0.5);
  t.next_state = t.state;
  t.action = 1;
  t.reward = 2.0;
  t.terminal = true;
  Hyperparams hp;
  hp.learning_rate = 0.01;
  Optimizer opt(hp);
  std::vector<Transition> batch{t};
  double gap = std::abs(net.forward(t.state)[1] - 2.0);
  for (int i = 0; i < 200; ++i) {
    qnet_backward(net, batch, target, hp, opt);
    const double next = std::abs(net.forward(t.state)[1] - 2.0);
    REQUIRE(next <= gap + 1e-12);
    gap = next;
  }
  CHECK(gap < 1e-3);
}

TEST_CASE("non-finite updates raise a training fault") {
  Rng rng(9);
  QNetwork net = random_net(rng, 2, {2}, 2);
  Transition t;
  t.state = Eigen::Vector2d(1, 1);
  t.next_state = t.state;
  t.reward = INFINITY;
  t.terminal = true;
  Hyperparams hp;
  Optimizer opt(hp);
  std::vector<Transition> batch{t};
  CHECK_THROWS_AS(qnet_backward(net, batch, net, hp, opt), TrainingFault);
}

TEST_CASE("target sync") {
  Rng rng(10);
  QNetwork online = random_net(rng, 12, {16, 8, 8}, 8);
  QNetwork target = random_net(rng, 12, {16, 8, 8}, 8);
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(12, 0.4);
  target_sync(online, target);
  CHECK(target.forward(s) == online.forward(s));
  target_sync(online, target);
  CHECK(target.forward(s) == online.forward(s));

  Hyperparams hp;
  Optimizer opt(hp);
  auto batch = random_batch(rng, 12, 8, 8);
  qnet_backward(online, batch, target, hp, opt);
  CHECK_FALSE(target.forward(s) == online.forward(s));

  QNetwork other(12, {4}, 8);
  CHECK_THROWS_AS(target_sync(online, other), DimensionError);
}

TEST_CASE("float instantiation") {
  DuelingQNetwork<float> net(3, {4}, 2);
  Rng rng(1);
  net.initialize(rng);
  const Eigen::VectorXf q = net.forward(Eigen::Vector3f(0.1f, 0.2f, 0.3f));
  CHECK(q.size() == 2);
}
