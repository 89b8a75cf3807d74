#pragma once

#include <vector>

#include "idxsel/index.hpp"

namespace idxsel {

// Fixed bucket array with separate chaining; never rehashes. Scans collect
// every key >= start and sort, so they cost a full pass over the table.
class HashIndex final : public Index {
 public:
  HashIndex(IndexConfig config, std::size_t bucket_count, IndexOptions options = {});

  StructureKind kind() const override { return StructureKind::Hash; }
  std::size_t size() const override { return size_; }

  std::optional<Value> read(const Key& key) const override;
  void insert(const Key& key, Value value) override;
  bool update(const Key& key, Value value) override;
  std::vector<Record> scan(const Key& start, std::size_t count) const override;
  std::optional<Value> rmw(const Key& key, Value new_value) override;

  std::size_t bucket_count() const { return buckets_.size(); }

 private:
  using Bucket = std::vector<Record>;

  Bucket& bucket(const Key& key);
  const Bucket& bucket(const Key& key) const;
  Value* find(const Key& key);
  const Value* find(const Key& key) const;

  std::vector<Bucket> buckets_;
  std::size_t size_ = 0;
};

}  // namespace idxsel
