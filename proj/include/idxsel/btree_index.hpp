#pragma once

#include <memory>
#include <vector>

#include "idxsel/index.hpp"

namespace idxsel {

// In-memory B+ tree. Every node holds at most `fanout` entries; leaves are
// chained left to right for range scans. No deletes.
class BTreeIndex final : public Index {
 public:
  BTreeIndex(IndexConfig config, std::size_t fanout, IndexOptions options = {});
  ~BTreeIndex() override;

  StructureKind kind() const override { return StructureKind::BTree; }
  std::size_t size() const override { return size_; }

  std::optional<Value> read(const Key& key) const override;
  void insert(const Key& key, Value value) override;
  bool update(const Key& key, Value value) override;
  std::vector<Record> scan(const Key& start, std::size_t count) const override;
  std::optional<Value> rmw(const Key& key, Value new_value) override;

  std::size_t fanout() const { return fanout_; }
  std::size_t height() const;

 private:
  struct Node;
  struct Split;

  Value* find(const Key& key) const;
  const Node* leaf_for(const Key& key) const;
  std::unique_ptr<Split> insert_into(Node& node, const Key& key, Value& value, bool& inserted);

  std::size_t fanout_;
  std::size_t size_ = 0;
  std::unique_ptr<Node> root_;
};

}  // namespace idxsel
