#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idxsel/errors.hpp"
#include "idxsel/selector.hpp"
#include "idxsel/trainer.hpp"

using namespace idxsel;

namespace {

WorkloadSpec pure(OpKind kind) { return pure_workloads()[static_cast<std::size_t>(kind)]; }

QNetwork untrained(std::uint64_t seed) {
  QNetwork net(12, {16, 8, 8}, 8);
  Rng rng(seed);
  net.initialize(rng);
  return net;
}

const QNetwork& insert_model() {
  static const QNetwork net = [] {
    TrainConfig c = TrainConfig::for_scale(TrainScale::Desk);
    Trainer t(Environment{}, c);
    t.train(pure(OpKind::Insert), 300);
    return t.agent().online();
  }();
  return net;
}

double best_throughput(Environment& env, const WorkloadSpec& spec) {
  env.reset(spec, default_config(StructureKind::BTree, env.grid()));
  double best = 0.0;
  for (const auto& c : enumerate_configs(env.grid())) best = std::max(best, env.throughput(c));
  return best;
}

}  // namespace

TEST_CASE("single-config space") {
  const ParamGrid g({std::vector<ParamAxis>{}, std::vector<ParamAxis>{{"bucket_count", {1024}}},
                     std::vector<ParamAxis>{}},
                    {false, true, false});
  Environment env(Bench(g, CostModel{}), EnvConfig{});
  QNetwork net(static_cast<Eigen::Index>(env.state_dim()), {4}, static_cast<Eigen::Index>(env.actions().size()));
  Rng rng(1);
  const auto r = select_optimal(net, env, pure(OpKind::Read), {}, rng);
  CHECK(r.optimal_config == IndexConfig{StructureKind::Hash, {0}});
  CHECK(r.max_return == 0.0);
  CHECK(r.episodes_run == 100);
  CHECK(r.visited.size() == 1);
}

TEST_CASE("argument checks") {
  Environment env;
  Rng rng(1);
  CHECK_THROWS_AS(select_optimal(untrained(1), env, pure(OpKind::Read), {0, true, 0.7}, rng),
                  ValidationError);
  CHECK_THROWS_AS(select_optimal(QNetwork(11, {4}, 8), env, pure(OpKind::Read), {}, rng), DimensionError);
  CHECK_THROWS_AS(select_optimal(QNetwork(12, {4}, 7), env, pure(OpKind::Read), {}, rng), DimensionError);
  CHECK_THROWS_AS(select_report(SelectionResult{}, env, pure(OpKind::Read), {}), ValidationError);
}

TEST_CASE("result invariants on untrained networks") {
  Environment env;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto spec = workload_sample_random(seed);
    const auto r = select_optimal(untrained(seed), env, spec, {30, true, 0.7}, rng);
    CHECK(r.episodes_run == 30);
    CHECK(r.episodes.size() == 30);
    REQUIRE_FALSE(r.visited.empty());
    CHECK(std::is_sorted(r.visited.begin(), r.visited.end(),
                         [](const auto& a, const auto& b) { return a.config < b.config; }));
    const auto it = std::find_if(r.visited.begin(), r.visited.end(),
                                 [&](const auto& v) { return v.config == r.optimal_config; });
    REQUIRE(it != r.visited.end());
    CHECK(it->best_return == r.max_return);
    for (const auto& v : r.visited) CHECK(v.best_return <= r.max_return);
    CHECK(r.max_return >= 0.0);
    for (const auto& e : r.episodes) {
      CHECK(e.length >= 1);
      CHECK(e.length <= env.episode_step_bound());
      CHECK(e.best_throughput == env.throughput(e.best_config));
      CHECK(e.best_throughput >= env.throughput(e.initial_config));
    }
  }
}

TEST_CASE("returns follow the greedy rollout") {
  Environment env;
  const QNetwork net = untrained(7);
  const auto spec = pure(OpKind::Scan);
  for (bool discounted : {true, false}) {
    Rng rng(3), replay(3);
    const auto r = select_optimal(net, env, spec, {1, discounted, 0.7}, rng);
    Environment mirror;
    EnvState s = mirror.reset(spec, replay);
    double R = 0.0, d = 1.0, best = -INFINITY;
    IndexConfig cand;
    while (!mirror.done()) {
      if (R > best) {
        best = R;
        cand = mirror.config();
      }
      const auto out = mirror.step(greedy_action(net.forward(s), mirror.legal_actions()));
      R += (discounted ? d : 1.0) * out.reward;
      d *= 0.7;
      s = out.next_state;
    }
    CHECK(r.episodes[0].episode_return == R);
    CHECK(r.max_return == best);
    CHECK(r.optimal_config == cand);
  }
}

TEST_CASE("selection is deterministic") {
  Environment a, b;
  Rng ra(9), rb(9);
  const auto x = select_optimal(untrained(2), a, pure(OpKind::Update), {40, true, 0.7}, ra);
  const auto y = select_optimal(untrained(2), b, pure(OpKind::Update), {40, true, 0.7}, rb);
  CHECK(x.optimal_config == y.optimal_config);
  CHECK(x.max_return == y.max_return);
  CHECK(x.visited.size() == y.visited.size());
}

TEST_CASE("insert-only selection picks the best lsm config") {
  Environment env;
  Rng rng(11);
  const auto spec = pure(OpKind::Insert);
  const auto r = select_optimal(insert_model(), env, spec, {}, rng);
  CHECK(r.optimal_config.kind == StructureKind::LsmTree);
  CHECK(env.throughput(r.optimal_config) == best_throughput(env, spec));
}

TEST_CASE("selection report") {
  Environment env;
  Rng rng(12);
  const auto spec = pure(OpKind::Insert);
  const auto r = select_optimal(insert_model(), env, spec, {}, rng);
  auto baselines = default_baselines(env.grid());
  baselines.push_back(r.optimal_config);
  const auto rep = select_report(r, env, spec, baselines);
  REQUIRE(rep.baselines.size() == 4);
  CHECK(rep.baselines[0].label == "btree");
  CHECK(rep.baselines[2].label == "lsm");
  CHECK(rep.baselines[3].improvement_pct == 0.0);
  for (const auto& row : rep.baselines) {
    CHECK(row.throughput == env.throughput(row.config));
    CHECK(row.improvement_pct ==
          doctest::Approx((rep.selected_throughput - row.throughput) / row.throughput * 100.0));
  }
  // Random mean against enumeration under the reset law.
  double expect = 0.0;
  const auto& g = env.grid();
  for (const auto& c : enumerate_configs(g)) expect += env.throughput(c) / 3.0 / g.config_count(c.kind);
  CHECK(rep.random_mean_throughput == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rep.selected_throughput > rep.random_mean_throughput);
}

TEST_CASE("initial config probabilities match resets") {
  Environment env;
  const auto probs = initial_config_probabilities(env.grid());
  const auto configs = enumerate_configs(env.grid());
  CHECK(std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0) < 1e-12);
  std::vector<int> counts(configs.size());
  Rng rng(4);
  const int n = 120000;
  for (int i = 0; i < n; ++i) ++counts[config_ordinal(env.random_config(rng), env.grid())];
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const double se = std::sqrt(probs[i] * (1 - probs[i]) / n);
    CHECK(std::abs(counts[i] / double(n) - probs[i]) < 4 * se);
  }
}

TEST_CASE("coverage probability") {
  CHECK(coverage_probability({1.0}, 1) == 1.0);
  CHECK(coverage_probability({0.5, 0.5}, 1) == 0.0);
  CHECK(coverage_probability({0.5, 0.5}, 2) == doctest::Approx(0.5));
  CHECK(coverage_probability({0.5, 0.5}, 3) == doctest::Approx(0.75));
  CHECK_THROWS_AS(coverage_probability(std::vector<double>(21, 1.0 / 21), 5), DomainError);

  Environment env;
  const auto probs = initial_config_probabilities(env.grid());
  const std::size_t space = probs.size();
  Rng rng(6);
  for (std::size_t draws : {space * 3, std::size_t{60}, std::size_t{100}}) {
    const int trials = 20000;
    int covered = 0;
    for (int t = 0; t < trials; ++t) {
      std::vector<bool> seen(space);
      for (std::size_t d = 0; d < draws; ++d) seen[config_ordinal(env.random_config(rng), env.grid())] = true;
      covered += std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    }
    const double p = coverage_probability(probs, draws);
    const double se = std::sqrt(p * (1 - p) / trials);
    CAPTURE(draws);
    CHECK(std::abs(covered / double(trials) - p) < 4 * se + 1e-3);
  }
  // Three draws per config covers the space well under half the time; the default
  // rollout count clears 0.95.
  CHECK(coverage_probability(probs, 3 * space) == doctest::Approx(0.378918475936).epsilon(1e-9));
  CHECK(coverage_probability(std::vector<double>(space, 1.0 / space), 3 * space) == doctest::Approx(0.562995134192).epsilon(1e-9));
  CHECK(coverage_probability(probs, SelectionOptions{}.episodes) >= 0.95);
}
