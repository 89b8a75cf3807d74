#pragma once

#include <map>
#include <vector>

#include "idxsel/index.hpp"

namespace idxsel {

// Log-structured merge tree: one memtable plus leveled sorted runs.
//
// Writes go to the memtable. When its payload exceeds memtable_bytes it is
// merged into level 0; level i holds at most memtable_bytes * size_ratio^(i+1)
// bytes and spills into level i + 1 by a full merge when over budget. Each
// level is a single sorted run. No bloom filters, so a miss probes every run.
//
// Capacity counts stored entries, including duplicates not yet compacted.
class LsmIndex final : public Index {
 public:
  LsmIndex(IndexConfig config, std::size_t memtable_bytes, std::size_t size_ratio,
           IndexOptions options = {});

  StructureKind kind() const override { return StructureKind::LsmTree; }
  // Distinct live keys; O(n) merge.
  std::size_t size() const override;

  std::optional<Value> read(const Key& key) const override;
  void insert(const Key& key, Value value) override;
  bool update(const Key& key, Value value) override;
  std::vector<Record> scan(const Key& start, std::size_t count) const override;
  std::optional<Value> rmw(const Key& key, Value new_value) override;

  std::size_t level_count() const { return levels_.size(); }
  std::size_t run_count() const;
  std::size_t flush_count() const { return flushes_; }
  std::size_t compaction_count() const { return compactions_; }
  std::size_t memtable_entries() const { return memtable_.size(); }

 private:
  struct Run {
    std::vector<Record> records;
    std::size_t bytes = 0;
  };

  void put(const Key& key, Value value);
  void flush();
  static Run merge(const Run& newer, const Run& older);
  std::size_t level_budget(std::size_t level) const;

  std::size_t memtable_bytes_;
  std::size_t size_ratio_;
  std::map<Key, Value> memtable_;
  std::size_t memtable_used_ = 0;
  std::vector<Run> levels_;
  std::size_t stored_entries_ = 0;
  std::size_t flushes_ = 0;
  std::size_t compactions_ = 0;
};

}  // namespace idxsel
