#include <doctest.h>

#include <cmath>
#include <numeric>

#include "idxsel/checkpoint.hpp"
#include "idxsel/errors.hpp"
#include "idxsel/trainer.hpp"

using namespace idxsel;

namespace {

WorkloadSpec pure(OpKind kind) { return pure_workloads()[static_cast<std::size_t>(kind)]; }

TrainConfig desk(std::uint64_t seed = 1) {
  TrainConfig c = TrainConfig::for_scale(TrainScale::Desk);
  c.seed = seed;
  return c;
}

std::vector<std::uint8_t> weights(const Trainer& t) {
  return serialize_checkpoint({t.agent().online(), t.config().hyperparams});
}

}  // namespace

TEST_CASE("scale presets") {
  const auto paper = TrainConfig::for_scale(TrainScale::Paper);
  CHECK(paper.phase1_episodes == 1000);
  CHECK(paper.phase2_random_workloads == 150);
  CHECK(paper.phase2_episodes == 300);
  CHECK(paper.hyperparams.learning_rate == 0.001);
  CHECK(paper.hyperparams.gamma == 0.7);
  CHECK(paper.hyperparams.epsilon == 0.7);
  CHECK(paper.hyperparams.replay_capacity == 50000);
  CHECK(paper.hyperparams.hidden == std::vector<Eigen::Index>{16, 8, 8});
  const auto d = desk();
  CHECK(d.phase1_episodes == 50);
  CHECK(d.phase2_random_workloads == 20);
  CHECK(d.phase2_episodes == 30);
  CHECK(d.hyperparams.gamma == 0.7);
  CHECK(d.hyperparams.epsilon == 0.7);
  CHECK(parse_train_scale("paper") == TrainScale::Paper);
  CHECK_THROWS_AS(parse_train_scale("huge"), ConfigError);
}

TEST_CASE("zero episodes leave the network untouched") {
  Trainer t(Environment{}, desk());
  const auto before = weights(t);
  const auto report = t.train(pure(OpKind::Read), 0);
  CHECK(report.episodes.empty());
  CHECK(report.total_steps == 0);
  CHECK(report.updates == 0);
  CHECK(weights(t) == before);
}

TEST_CASE("single-config grid gives length-one episodes") {
  const ParamGrid g({std::vector<ParamAxis>{{"fanout", {64}}}, std::vector<ParamAxis>{},
                     std::vector<ParamAxis>{}},
                    {true, false, false});
  Environment env(Bench(g, CostModel{}), EnvConfig{});
  CHECK(env.grid().config_count() == 1);
  Trainer t(env, desk());
  const auto report = t.train(pure(OpKind::Scan), 40);
  for (const auto& e : report.episodes) {
    CHECK(e.length == 1);
    CHECK(e.total_reward == 0.0);
    CHECK(e.final_config == e.initial_config);
  }
}

TEST_CASE("report accounting") {
  Trainer t(Environment{}, desk());
  const auto report = t.train(pure(OpKind::Update), 60);
  CHECK(report.episodes.size() == 60);
  std::size_t sum = 0;
  for (const auto& e : report.episodes) {
    CHECK(e.length >= 1);
    CHECK(e.length <= t.env().episode_step_bound());
    CHECK(e.workload == "pure-update");
    sum += e.length;
  }
  CHECK(report.total_steps == sum);
  CHECK(report.updates == t.agent().updates());
  CHECK(t.agent().pool().size() == sum);
  CHECK(report.wall_seconds >= 0.0);
}

TEST_CASE("training is deterministic in the seed") {
  Trainer a(Environment{}, desk(3)), b(Environment{}, desk(3)), c(Environment{}, desk(4));
  a.train(pure(OpKind::Insert), 40);
  b.train(pure(OpKind::Insert), 40);
  c.train(pure(OpKind::Insert), 40);
  CHECK(weights(a) == weights(b));
  CHECK(weights(a) != weights(c));
}

TEST_CASE("insert-only training learns to reach an lsm config") {
  Trainer t(Environment{}, desk());
  const auto report = t.train(pure(OpKind::Insert), 300);
  const auto n = report.episodes.size() / 10;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    first += report.episodes[i].total_reward / n;
    last += report.episodes[report.episodes.size() - 1 - i].total_reward / n;
  }
  CHECK(last > first);

  // A rollout ends where its prefix return peaks, the config the selector
  // would record. The repeated state that closes the episode is reported for
  // information only.
  Environment& env = t.env();
  int final_lsm = 0;
  for (const auto& start : enumerate_configs(env.grid())) {
    CAPTURE(format_config(start, env.grid()));
    EnvState s = env.reset(pure(OpKind::Insert), start);
    double R = 0.0, discount = 1.0, best = -INFINITY;
    IndexConfig peak;
    while (!env.done()) {
      if (R > best) {
        best = R;
        peak = env.config();
      }
      const auto out = env.step(t.agent().greedy(s, env.legal_actions()));
      R += discount * out.reward;
      discount *= t.config().hyperparams.gamma;
      s = out.next_state;
    }
    CHECK(peak.kind == StructureKind::LsmTree);
    final_lsm += env.config().kind == StructureKind::LsmTree;
  }
  MESSAGE("episodes closing on an lsm config: " << final_lsm << " of 12");
}

TEST_CASE("curriculum schedule") {
  TrainConfig c = desk(2);
  c.phase1_episodes = 4;
  c.phase2_random_workloads = 3;
  c.phase2_episodes = 5;
  c.workload_base.op_count = 500;
  Trainer t(Environment{}, c);
  const auto report = t.train_curriculum();
  REQUIRE(report.episodes.size() == 5 * 4 + 3 * 5);
  const auto randoms = curriculum_random_workloads(c);
  REQUIRE(randoms.size() == 3);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(report.episodes[i].workload == pure_workloads()[i / 4].name);
  }
  for (std::size_t i = 0; i < 15; ++i) CHECK(report.episodes[20 + i].workload == randoms[i / 5].name);
  for (const auto& w : randoms) CHECK(w.op_count == 500);
  CHECK(curriculum_random_workloads(c) == randoms);
  TrainConfig other = c;
  other.workload_seed = 99;
  CHECK_FALSE(curriculum_random_workloads(other) == randoms);
  std::size_t sum = 0;
  for (const auto& e : report.episodes) sum += e.length;
  CHECK(report.total_steps == sum);
}

TEST_CASE("training faults surface") {
  TrainConfig c = desk();
  c.hyperparams.learning_rate = 1e250;
  Trainer t(Environment{}, c);
  CHECK_THROWS_AS(t.train(pure(OpKind::Insert), 50), TrainingFault);
}

TEST_CASE("shape and config checks") {
  CHECK_THROWS_AS(Trainer(Environment{}, desk(), QNetwork(5, {4}, 8)), DimensionError);
  TrainConfig bad = desk();
  bad.hyperparams.gamma = 2.0;
  CHECK_THROWS_AS(Trainer(Environment{}, bad), ConfigError);
  Trainer t(Environment{}, desk());
  WorkloadSpec invalid;
  CHECK_THROWS_AS(t.train(invalid, 1), ValidationError);
}
