#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>

#include "idxsel/checkpoint.hpp"
#include "idxsel/errors.hpp"
#include "support.hpp"

using namespace idxsel;

namespace {

Checkpoint sample_checkpoint(std::uint64_t seed) {
  Rng rng(seed);
  Checkpoint cp;
  cp.net = idxsel::testing::random_net(rng, 12, {16, 8, 8}, 8);
  cp.hyperparams.learning_rate = 0.0123;
  cp.hyperparams.gamma = 0.65;
  cp.hyperparams.epsilon = 0.4;
  cp.hyperparams.epsilon_is_exploit = false;
  cp.hyperparams.batch_size = 17;
  cp.hyperparams.target_sync_every = 99;
  cp.hyperparams.update_every_steps = 3;
  cp.hyperparams.updates_per_step = 4;
  cp.hyperparams.replay_capacity = 1234;
  cp.hyperparams.optimizer = OptimizerKind::Adam;
  cp.hyperparams.loss = LossKind::Huber;
  cp.hyperparams.huber_delta = 2.5;
  cp.hyperparams.lr_decay = 0.999;
  return cp;
}

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t off) {
  return b[off] | b[off + 1] << 8 | b[off + 2] << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

std::uint64_t u64_at(const std::vector<std::uint8_t>& b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = v << 8 | b[off + static_cast<std::size_t>(i)];
  return v;
}

void reseal(std::vector<std::uint8_t>& b) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i + 8 < b.size(); ++i) {
    h ^= b[i];
    h *= 0x100000001b3ULL;
  }
  for (int i = 0; i < 8; ++i) b[b.size() - 8 + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(h >> (8 * i));
}

}  // namespace

TEST_CASE("round-trip preserves forward outputs bit for bit") {
  const Checkpoint cp = sample_checkpoint(1);
  const Checkpoint back = deserialize_checkpoint(serialize_checkpoint(cp));
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(12, [&] { return rng.uniform(); });
    const Eigen::VectorXd a = cp.net.forward(s), b = back.net.forward(s);
    REQUIRE(std::memcmp(a.data(), b.data(), sizeof(double) * 8) == 0);
  }
  const auto& h = back.hyperparams;
  CHECK(h.learning_rate == 0.0123);
  CHECK(h.gamma == 0.65);
  CHECK(h.epsilon == 0.4);
  CHECK_FALSE(h.epsilon_is_exploit);
  CHECK(h.batch_size == 17);
  CHECK(h.target_sync_every == 99);
  CHECK(h.update_every_steps == 3);
  CHECK(h.updates_per_step == 4);
  CHECK(h.replay_capacity == 1234);
  CHECK(h.optimizer == OptimizerKind::Adam);
  CHECK(h.loss == LossKind::Huber);
  CHECK(h.huber_delta == 2.5);
  CHECK(h.lr_decay == 0.999);
  CHECK(h.hidden == std::vector<Eigen::Index>{16, 8, 8});
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(cp));
}

TEST_CASE("byte layout matches the documented format") {
  const Checkpoint cp = sample_checkpoint(3);
  const auto b = serialize_checkpoint(cp);
  CHECK(std::string(b.begin(), b.begin() + 8) == "IDXSELQN");
  CHECK(u32_at(b, 8) == 1);
  CHECK(u32_at(b, 12) == 12);
  CHECK(u32_at(b, 16) == 8);
  CHECK(u32_at(b, 20) == 3);
  CHECK(u32_at(b, 24) == 16);
  CHECK(u32_at(b, 28) == 8);
  CHECK(u32_at(b, 32) == 8);
  std::size_t off = 36;
  const auto hp_count = u32_at(b, off);
  off += 4;
  bool saw_gamma = false;
  for (std::uint32_t i = 0; i < hp_count; ++i) {
    const std::size_t len = b[off] | b[off + 1] << 8;
    const std::string name(b.begin() + static_cast<long>(off + 2), b.begin() + static_cast<long>(off + 2 + len));
    off += 2 + len;
    if (name == "gamma") {
      saw_gamma = true;
      CHECK(std::bit_cast<double>(u64_at(b, off)) == 0.65);
    }
    off += 8;
  }
  CHECK(saw_gamma);
  CHECK(u32_at(b, off) == 10);
  off += 4;
  // First tensor: trunk[0] weight, 16 x 12, row-major.
  CHECK(u32_at(b, off) == 16);
  CHECK(u32_at(b, off + 4) == 12);
  off += 8;
  const auto& w = cp.net.params().trunk[0].weight;
  CHECK(std::bit_cast<double>(u64_at(b, off)) == w(0, 0));
  CHECK(std::bit_cast<double>(u64_at(b, off + 8)) == w(0, 1));
  CHECK(std::bit_cast<double>(u64_at(b, off + 8 * 12)) == w(1, 0));
  const auto params = static_cast<std::size_t>(cp.net.params().parameter_count());
  CHECK(b.size() == off - 8 + 10 * 8 + params * 8 + 8);
}

TEST_CASE("corruption is detected") {
  const auto good = serialize_checkpoint(sample_checkpoint(4));
  SUBCASE("every truncation") {
    for (std::size_t n = 0; n < good.size(); n += 7) {
      std::vector<std::uint8_t> cut(good.begin(), good.begin() + static_cast<long>(n));
      REQUIRE_THROWS_AS(deserialize_checkpoint(cut), FormatError);
    }
  }
  SUBCASE("bit flips") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
      auto bad = good;
      bad[rng.below(bad.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
      REQUIRE_THROWS_AS(deserialize_checkpoint(bad), FormatError);
    }
  }
  SUBCASE("resealed header damage") {
    auto magic = good;
    magic[0] = 'X';
    reseal(magic);
    CHECK_THROWS_AS(deserialize_checkpoint(magic), FormatError);
    auto version = good;
    version[8] = 2;
    reseal(version);
    CHECK_THROWS_AS(deserialize_checkpoint(version), FormatError);
    auto dims = good;
    dims[12] = 0;
    reseal(dims);
    CHECK_THROWS_AS(deserialize_checkpoint(dims), FormatError);
    auto huge = good;
    huge[15] = 0x7f;
    reseal(huge);
    CHECK_THROWS_AS(deserialize_checkpoint(huge), FormatError);
    auto trailing = good;
    trailing.insert(trailing.end() - 8, 0);
    reseal(trailing);
    CHECK_THROWS_AS(deserialize_checkpoint(trailing), FormatError);
  }
}

TEST_CASE("file save and load") {
  const auto path = std::filesystem::temp_directory_path() / "idxsel_test_checkpoint.bin";
  const Checkpoint cp = sample_checkpoint(6);
  save_checkpoint(path, cp);
  const Checkpoint back = load_checkpoint(path);
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(cp));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
}
