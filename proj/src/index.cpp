#include "idxsel/index.hpp"

#include <algorithm>

#include "idxsel/btree_index.hpp"
#include "idxsel/errors.hpp"
#include "idxsel/hash_index.hpp"
#include "idxsel/lsm_index.hpp"

namespace idxsel {

void Index::check_value(const Value& value) const {
  if (value.empty()) throw ValidationError("values must be at least one byte");
  if (value.size() > options_.max_value_bytes) {
    throw ValidationError("value of " + std::to_string(value.size()) + " bytes exceeds max " +
                          std::to_string(options_.max_value_bytes));
  }
}

void Index::check_capacity(std::size_t current) const {
  if (current >= options_.max_records) {
    throw CapacityError("index full at " + std::to_string(options_.max_records) + " records");
  }
}

std::unique_ptr<Index> make_empty_index(const IndexConfig& config, const ParamGrid& grid,
                                        IndexOptions options) {
  validate_config(config, grid);
  const auto param = [&](std::size_t axis) {
    return static_cast<std::size_t>(grid.value(config.kind, axis, config.params[axis]));
  };
  switch (config.kind) {
    case StructureKind::BTree:
      return std::make_unique<BTreeIndex>(config, param(0), options);
    case StructureKind::Hash:
      return std::make_unique<HashIndex>(config, param(0), options);
    case StructureKind::LsmTree:
      return std::make_unique<LsmIndex>(config, param(0),
                                        config.params.size() > 1 ? param(1) : 10, options);
  }
  throw ConfigError("unknown structure kind");
}

std::unique_ptr<Index> index_build(const IndexConfig& config, std::span<const Record> records,
                                   const ParamGrid& grid, IndexOptions options) {
  auto index = make_empty_index(config, grid, options);

  std::vector<const Key*> keys;
  keys.reserve(records.size());
  for (const auto& r : records) keys.push_back(&r.first);
  std::sort(keys.begin(), keys.end(), [](const Key* a, const Key* b) { return *a < *b; });
  const auto dup = std::adjacent_find(keys.begin(), keys.end(),
                                      [](const Key* a, const Key* b) { return *a == *b; });
  if (dup != keys.end()) throw BuildError("duplicate key " + (*dup)->str() + " in build input");

  for (const auto& [k, v] : records) index->insert(k, v);
  return index;
}

}  // namespace idxsel
