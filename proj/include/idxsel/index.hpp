#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "idxsel/index_config.hpp"
#include "idxsel/key_value.hpp"

namespace idxsel {

struct IndexOptions {
  std::size_t max_records = std::size_t{1} << 22;
  std::size_t max_value_bytes = 4096;
};

// Common key-value surface of the three structures. Single-writer: callers
// serialize mutation of one instance.
class Index {
 public:
  virtual ~Index() = default;

  virtual StructureKind kind() const = 0;
  virtual std::size_t size() const = 0;

  virtual std::optional<Value> read(const Key& key) const = 0;
  // Upsert. Throws CapacityError when a new key would exceed max_records.
  virtual void insert(const Key& key, Value value) = 0;
  // False (and no change) when key is absent.
  virtual bool update(const Key& key, Value value) = 0;
  // Up to count pairs with key >= start, ascending.
  virtual std::vector<Record> scan(const Key& start, std::size_t count) const = 0;
  // Returns the previous value and installs new_value; nullopt if absent.
  virtual std::optional<Value> rmw(const Key& key, Value new_value) = 0;

  const IndexConfig& config() const { return config_; }

 protected:
  Index(IndexConfig config, IndexOptions options)
      : config_(std::move(config)), options_(options) {}

  void check_value(const Value& value) const;
  void check_capacity(std::size_t current) const;

  IndexConfig config_;
  IndexOptions options_;
};

std::unique_ptr<Index> make_empty_index(const IndexConfig& config, const ParamGrid& grid,
                                        IndexOptions options = {});

// Builds config and loads records. Duplicate keys raise BuildError; bad
// parameter indices raise ConfigError.
std::unique_ptr<Index> index_build(const IndexConfig& config, std::span<const Record> records,
                                   const ParamGrid& grid = ParamGrid{},
                                   IndexOptions options = {});

}  // namespace idxsel
