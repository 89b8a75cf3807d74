#include "idxsel/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "idxsel/errors.hpp"
#include "idxsel/key_value.hpp"

namespace idxsel {

namespace {

#define IDXSEL_COST_FIELDS(X)                                                                  \
  X(btree_node) X(btree_compare) X(btree_write_base) X(btree_write_per_entry) X(btree_split) \
  X(btree_leaf_item) X(hash_base) X(hash_probe) X(hash_write) X(hash_scan_bucket)            \
  X(hash_scan_sort) X(hash_scan_item) X(lsm_memtable) X(lsm_run_probe) X(lsm_put)            \
  X(lsm_compact) X(lsm_scan_item)

}  // namespace

double CostModel::op_cost(const IndexConfig& config, const ParamGrid& grid, OpKind op, double n,
                          std::uint32_t scan_len, std::uint32_t value_size) const {
  n = std::max(n, 1.0);
  const double log2n = std::log2(std::max(n, 2.0));
  const double len = static_cast<double>(scan_len);
  const auto param = [&](std::size_t axis) {
    return static_cast<double>(grid.value(config.kind, axis, config.params.at(axis)));
  };

  switch (config.kind) {
    case StructureKind::BTree: {
      const double fanout = param(0);
      const double height = std::max(1.0, std::log(n) / std::log(fanout));
      const double descend = btree_node * height + btree_compare * log2n;
      const double write = btree_write_base + btree_write_per_entry * fanout;
      switch (op) {
        case OpKind::Read: return descend;
        case OpKind::Update:
        case OpKind::Rmw: return descend + write;
        case OpKind::Insert: return descend + write + btree_split;
        case OpKind::Scan: return descend + len * btree_leaf_item + len / fanout * btree_node;
      }
      break;
    }
    case StructureKind::Hash: {
      const double buckets = param(0);
      const double hit = hash_base + hash_probe * (1.0 + n / (2.0 * buckets));
      switch (op) {
        case OpKind::Read: return hit;
        case OpKind::Update:
        case OpKind::Rmw: return hit + hash_write;
        // Upsert walks the whole chain before appending.
        case OpKind::Insert: return hash_base + hash_probe * (1.0 + n / buckets) + hash_write;
        case OpKind::Scan:
          return hash_scan_bucket * buckets + hash_scan_sort * n * log2n + hash_scan_item * len;
      }
      break;
    }
    case StructureKind::LsmTree: {
      const double memtable = param(0);
      const double ratio = config.params.size() > 1 ? param(1) : 10.0;
      const double data = n * static_cast<double>(kKeyWidth + value_size);
      const double levels = std::log1p(data / memtable) / std::log(ratio);
      const double runs = 1.0 + levels;
      const double get = lsm_memtable + lsm_run_probe * runs;
      const double put = lsm_put + lsm_compact * (1.0 + levels * (ratio + 1.0) / 2.0);
      switch (op) {
        case OpKind::Read: return get;
        case OpKind::Update:
        case OpKind::Rmw: return get + put;
        case OpKind::Insert: return put;
        case OpKind::Scan: return runs * (lsm_run_probe + len * lsm_scan_item);
      }
      break;
    }
  }
  throw ConfigError("cost model: unknown structure/operation");
}

std::string to_json(const CostModel& model) {
  nlohmann::ordered_json j;
  j["version"] = model.version;
#define X(name) j[#name] = model.name;
  IDXSEL_COST_FIELDS(X)
#undef X
  return j.dump(2) + "\n";
}

CostModel cost_model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cost model: ") + e.what());
  }
  CostModel model;
  if (j.value("version", 0) != model.version) {
    throw FormatError("cost model: unsupported version");
  }
#define X(name)                                                                 \
  if (!j.contains(#name)) throw FormatError("cost model: missing '" #name "'"); \
  model.name = j.at(#name).get<double>();                                      \
  if (!(model.name > 0.0)) throw FormatError("cost model: '" #name "' must be positive");
  IDXSEL_COST_FIELDS(X)
#undef X
  return model;
}

CostModel load_cost_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open cost model " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return cost_model_from_json(buf.str());
}

}  // namespace idxsel
