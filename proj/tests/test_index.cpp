#include <doctest.h>

#include <map>
#include <unordered_map>

#include "idxsel/btree_index.hpp"
#include "idxsel/errors.hpp"
#include "idxsel/hash_index.hpp"
#include "idxsel/index.hpp"
#include "idxsel/lsm_index.hpp"
#include "idxsel/rng.hpp"

using namespace idxsel;

namespace {

// Small parameters so B-tree splits, hash chains and LSM flushes all happen
// within a few thousand records.
ParamGrid tiny_grid() {
  return ParamGrid({std::vector<ParamAxis>{{"fanout", {3, 4, 16}}},
                    std::vector<ParamAxis>{{"bucket_count", {1, 7, 64}}},
                    std::vector<ParamAxis>{{"memtable_bytes", {512, 4096}}, {"size_ratio", {2, 3}}}});
}

std::vector<Record> sorted_records(std::size_t n, std::uint64_t seed) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(Key::from_id(i), make_value(seed + i, 20));
  return out;
}

struct Pair {
  const ParamGrid* grid;
  IndexConfig config;
};

std::vector<Pair> every_config(const ParamGrid& tiny, const ParamGrid& dflt) {
  std::vector<Pair> out;
  for (auto& c : enumerate_configs(tiny)) out.push_back({&tiny, c});
  for (auto& c : enumerate_configs(dflt)) out.push_back({&dflt, c});
  return out;
}

}  // namespace

TEST_CASE("keys are fixed width and ordered bytewise") {
  CHECK(Key::from_id(42).str() == "0000000000000042");
  CHECK(Key::from_string("42") == Key::from_id(42));
  CHECK(Key::from_id(9) < Key::from_id(10));
  CHECK_THROWS_AS(Key::from_string("01234567890123456"), ConfigError);
  CHECK(make_value(7, 33).size() == 33);
  CHECK(make_value(7, 33) == make_value(7, 33));
  CHECK(make_value(7, 33) != make_value(8, 33));
}

TEST_CASE("trivial builds") {
  const ParamGrid grid;
  SUBCASE("empty btree") {
    auto idx = index_build(parse_config("btree:fanout=16", grid), {}, grid);
    CHECK(idx->size() == 0);
    CHECK_FALSE(idx->read(Key::from_id(1)).has_value());
    CHECK(idx->scan(Key{}, 10).empty());
  }
  SUBCASE("singleton hash") {
    std::vector<Record> recs{{Key::from_id(1), "v1"}};
    auto idx = index_build(parse_config("hash:bucket_count=1024", grid), recs, grid);
    CHECK(idx->read(Key::from_id(1)) == std::optional<Value>("v1"));
  }
  SUBCASE("config carries through") {
    auto c = parse_config("lsm:memtable_bytes=65536,size_ratio=4", grid);
    auto idx = index_build(c, {}, grid);
    CHECK(idx->kind() == StructureKind::LsmTree);
    CHECK(idx->config() == c);
  }
}

TEST_CASE("build errors") {
  const ParamGrid grid;
  std::vector<Record> dup{{Key::from_id(1), "a"}, {Key::from_id(2), "b"}, {Key::from_id(1), "c"}};
  for (const auto& c : enumerate_configs(grid)) {
    CHECK_THROWS_AS(index_build(c, dup, grid), BuildError);
  }
  IndexConfig bad{StructureKind::BTree, {3}};
  CHECK_THROWS_AS(index_build(bad, {}, grid), ConfigError);
  IndexConfig short_lsm{StructureKind::LsmTree, {0}};
  CHECK_THROWS_AS(index_build(short_lsm, {}, grid), ConfigError);
}

TEST_CASE("lsm 64KiB build of 10000 records scans back in key order") {
  const ParamGrid grid;
  auto recs = sorted_records(10000, 5);
  std::vector<Record> shuffled = recs;
  Rng rng(3);
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  auto idx = index_build(parse_config("lsm:memtable_bytes=65536", grid), shuffled, grid);
  auto& lsm = dynamic_cast<LsmIndex&>(*idx);
  CHECK(lsm.flush_count() > 0);
  CHECK(idx->size() == 10000);
  CHECK(idx->scan(Key{}, 10000) == recs);
  CHECK(idx->scan(Key{}, 20000) == recs);
}

TEST_CASE("single-operation semantics on every config") {
  const ParamGrid tiny = tiny_grid();
  const ParamGrid dflt;
  for (const auto& [grid, config] : every_config(tiny, dflt)) {
    CAPTURE(format_config(config, *grid));
    auto idx = make_empty_index(config, *grid);
    const Key k = Key::from_id(5);
    CHECK_FALSE(idx->read(k));
    CHECK_FALSE(idx->update(k, "x"));
    CHECK_FALSE(idx->rmw(k, "x"));
    CHECK(idx->size() == 0);
    idx->insert(k, "v1");
    CHECK(idx->read(k) == std::optional<Value>("v1"));
    CHECK(idx->update(k, "v2"));
    CHECK(idx->read(k) == std::optional<Value>("v2"));
    CHECK(idx->rmw(k, "v3") == std::optional<Value>("v2"));
    CHECK(idx->read(k) == std::optional<Value>("v3"));
    idx->insert(k, "v4");  // upsert
    CHECK(idx->read(k) == std::optional<Value>("v4"));
    CHECK(idx->size() == 1);
    CHECK_THROWS_AS(idx->insert(Key::from_id(6), ""), ValidationError);
  }
}

TEST_CASE("randomized operations match a shadow ordered map") {
  const ParamGrid tiny = tiny_grid();
  const ParamGrid dflt;
  std::uint64_t seed = 100;
  for (const auto& [grid, config] : every_config(tiny, dflt)) {
    CAPTURE(format_config(config, *grid));
    auto idx = make_empty_index(config, *grid);
    std::map<Key, Value> shadow;
    Rng rng(++seed);
    for (int step = 0; step < 4000; ++step) {
      const Key k = Key::from_id(rng.below(600));
      const Value v = make_value(rng.next(), 1 + rng.below(60));
      switch (rng.below(5)) {
        case 0:
          idx->insert(k, v);
          shadow[k] = v;
          break;
        case 1: {
          const bool present = shadow.contains(k);
          REQUIRE(idx->update(k, v) == present);
          if (present) shadow[k] = v;
          break;
        }
        case 2: {
          auto it = shadow.find(k);
          const auto got = idx->rmw(k, v);
          if (it == shadow.end()) {
            REQUIRE_FALSE(got);
          } else {
            REQUIRE(got == std::optional<Value>(it->second));
            it->second = v;
          }
          break;
        }
        case 3: {
          auto it = shadow.find(k);
          const auto got = idx->read(k);
          REQUIRE(got == (it == shadow.end() ? std::nullopt : std::optional<Value>(it->second)));
          break;
        }
        case 4: {
          const std::size_t count = 1 + rng.below(40);
          std::vector<Record> expect;
          for (auto it = shadow.lower_bound(k); it != shadow.end() && expect.size() < count; ++it) {
            expect.emplace_back(*it);
          }
          REQUIRE(idx->scan(k, count) == expect);
          break;
        }
      }
    }
    REQUIRE(idx->size() == shadow.size());
    std::vector<Record> all(shadow.begin(), shadow.end());
    CHECK(idx->scan(Key{}, shadow.size() + 5) == all);
    for (const auto& [k, v] : shadow) REQUIRE(idx->read(k) == std::optional<Value>(v));
  }
}

TEST_CASE("1000 random inserts then reads agree with a hash-map oracle") {
  const ParamGrid grid;
  for (const auto& config : enumerate_configs(grid)) {
    auto idx = make_empty_index(config, grid);
    std::unordered_map<std::uint64_t, Value> oracle;
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
      const auto id = rng.below(1u << 30);
      const auto v = make_value(rng.next(), 30);
      idx->insert(Key::from_id(id), v);
      oracle[id] = v;
    }
    for (const auto& [id, v] : oracle) REQUIRE(idx->read(Key::from_id(id)) == std::optional<Value>(v));
  }
}

TEST_CASE("lsm keeps every key readable across flushes and compactions") {
  const ParamGrid tiny = tiny_grid();
  auto idx = make_empty_index(parse_config("lsm:memtable_bytes=512,size_ratio=2", tiny), tiny);
  auto& lsm = dynamic_cast<LsmIndex&>(*idx);
  std::map<Key, Value> shadow;
  Rng rng(9);
  for (int i = 0; i < 5000; ++i) {
    const Key k = Key::from_id(rng.below(3000));
    const Value v = make_value(i, 10);
    idx->insert(k, v);
    shadow[k] = v;
    if (i % 997 == 0) {
      for (const auto& [sk, sv] : shadow) REQUIRE(idx->read(sk) == std::optional<Value>(sv));
    }
  }
  CHECK(lsm.flush_count() > 50);
  CHECK(lsm.compaction_count() > 0);
  CHECK(lsm.level_count() >= 3);
  for (const auto& [k, v] : shadow) REQUIRE(idx->read(k) == std::optional<Value>(v));
  CHECK(idx->size() == shadow.size());
}

TEST_CASE("btree and lsm scans agree for identical contents") {
  const ParamGrid tiny = tiny_grid();
  auto bt = make_empty_index(parse_config("btree:fanout=3", tiny), tiny);
  auto lsm = make_empty_index(parse_config("lsm:memtable_bytes=512,size_ratio=3", tiny), tiny);
  auto hash = make_empty_index(parse_config("hash:bucket_count=7", tiny), tiny);
  Rng rng(21);
  for (int i = 0; i < 3000; ++i) {
    const Key k = Key::from_id(rng.below(100000));
    const Value v = make_value(rng.next(), 12);
    bt->insert(k, v);
    lsm->insert(k, v);
    hash->insert(k, v);
  }
  for (int i = 0; i < 200; ++i) {
    const Key start = Key::from_id(rng.below(110000));
    const std::size_t count = 1 + rng.below(300);
    const auto expect = bt->scan(start, count);
    REQUIRE(lsm->scan(start, count) == expect);
    REQUIRE(hash->scan(start, count) == expect);
  }
  CHECK(dynamic_cast<BTreeIndex&>(*bt).height() > 3);
}

TEST_CASE("build is deterministic") {
  const ParamGrid grid;
  auto recs = sorted_records(3000, 1);
  for (const auto& config : enumerate_configs(grid)) {
    auto a = index_build(config, recs, grid);
    auto b = index_build(config, recs, grid);
    CHECK(a->scan(Key{}, 5000) == b->scan(Key{}, 5000));
    CHECK(a->size() == b->size());
  }
}

TEST_CASE("capacity and value bounds") {
  const ParamGrid grid;
  IndexOptions opts;
  opts.max_records = 10;
  opts.max_value_bytes = 8;
  for (const auto& config : enumerate_configs(grid)) {
    auto idx = make_empty_index(config, grid, opts);
    for (int i = 0; i < 10; ++i) idx->insert(Key::from_id(i), "v");
    CHECK_THROWS_AS(idx->insert(Key::from_id(99), "v"), CapacityError);
    CHECK_THROWS_AS(idx->update(Key::from_id(1), "123456789"), ValidationError);
  }
}

TEST_CASE("grid and config helpers") {
  const ParamGrid grid;
  CHECK(grid.config_count() == 12);
  CHECK(grid.config_count(StructureKind::LsmTree) == 6);
  CHECK(grid.total_axis_count() == 4);
  CHECK(grid.max_axis_count() == 2);
  const auto configs = enumerate_configs(grid);
  REQUIRE(configs.size() == 12);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    CHECK(config_ordinal(configs[i], grid) == i);
    CHECK(parse_config(format_config(configs[i], grid), grid) == configs[i]);
  }
  CHECK(default_config(StructureKind::LsmTree, grid) == IndexConfig{StructureKind::LsmTree, {1, 0}});
  CHECK(parse_config("lsm", grid) == default_config(StructureKind::LsmTree, grid));
  CHECK_THROWS_AS(parse_config("btree:fanout=17", grid), ConfigError);
  CHECK_THROWS_AS(parse_config("trie", grid), ConfigError);
  CHECK_THROWS_AS(ParamGrid({std::vector<ParamAxis>{{"fanout", {16, 16}}}, {}, {}}), ConfigError);
}
