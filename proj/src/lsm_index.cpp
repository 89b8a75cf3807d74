#include "idxsel/lsm_index.hpp"

#include <algorithm>

#include "idxsel/errors.hpp"

namespace idxsel {

namespace {

std::size_t record_bytes(const Key&, const Value& v) { return kKeyWidth + v.size(); }

const Value* find_in_run(const std::vector<Record>& run, const Key& key) {
  const auto it = std::lower_bound(run.begin(), run.end(), key,
                                   [](const Record& r, const Key& k) { return r.first < k; });
  if (it == run.end() || it->first != key) return nullptr;
  return &it->second;
}

}  // namespace

LsmIndex::LsmIndex(IndexConfig config, std::size_t memtable_bytes, std::size_t size_ratio,
                   IndexOptions options)
    : Index(std::move(config), options), memtable_bytes_(memtable_bytes), size_ratio_(size_ratio) {
  if (memtable_bytes_ == 0) throw ConfigError("lsm memtable_bytes must be positive");
  if (size_ratio_ < 2) throw ConfigError("lsm size_ratio must be at least 2");
}

std::size_t LsmIndex::run_count() const {
  return static_cast<std::size_t>(
      std::count_if(levels_.begin(), levels_.end(), [](const Run& r) { return !r.records.empty(); }));
}

std::size_t LsmIndex::level_budget(std::size_t level) const {
  std::size_t budget = memtable_bytes_;
  for (std::size_t i = 0; i <= level; ++i) budget *= size_ratio_;
  return budget;
}

LsmIndex::Run LsmIndex::merge(const Run& newer, const Run& older) {
  Run out;
  out.records.reserve(newer.records.size() + older.records.size());
  auto a = newer.records.begin();
  auto b = older.records.begin();
  while (a != newer.records.end() || b != older.records.end()) {
    if (b == older.records.end() || (a != newer.records.end() && a->first <= b->first)) {
      if (b != older.records.end() && a->first == b->first) ++b;  // shadowed
      out.records.push_back(*a++);
    } else {
      out.records.push_back(*b++);
    }
    out.bytes += record_bytes(out.records.back().first, out.records.back().second);
  }
  return out;
}

void LsmIndex::flush() {
  Run fresh;
  fresh.records.reserve(memtable_.size());
  for (auto& [k, v] : memtable_) {
    fresh.bytes += record_bytes(k, v);
    fresh.records.emplace_back(k, std::move(v));
  }
  memtable_.clear();
  memtable_used_ = 0;
  ++flushes_;

  if (levels_.empty()) levels_.emplace_back();
  levels_[0] = merge(fresh, levels_[0]);
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].bytes <= level_budget(i)) break;
    if (i + 1 == levels_.size()) levels_.emplace_back();
    levels_[i + 1] = merge(levels_[i], levels_[i + 1]);
    levels_[i] = Run{};
    ++compactions_;
  }

  stored_entries_ = 0;
  for (const auto& run : levels_) stored_entries_ += run.records.size();
}

void LsmIndex::put(const Key& key, Value value) {
  const auto bytes = record_bytes(key, value);
  auto it = memtable_.find(key);
  if (it != memtable_.end()) {
    memtable_used_ -= record_bytes(key, it->second);
    it->second = std::move(value);
  } else {
    check_capacity(stored_entries_ + memtable_.size());
    memtable_.emplace(key, std::move(value));
  }
  memtable_used_ += bytes;
  if (memtable_used_ > memtable_bytes_) flush();
}

std::optional<Value> LsmIndex::read(const Key& key) const {
  if (auto it = memtable_.find(key); it != memtable_.end()) return it->second;
  for (const auto& run : levels_) {
    if (const Value* v = find_in_run(run.records, key)) return *v;
  }
  return std::nullopt;
}

void LsmIndex::insert(const Key& key, Value value) {
  check_value(value);
  put(key, std::move(value));
}

bool LsmIndex::update(const Key& key, Value value) {
  check_value(value);
  if (!read(key)) return false;
  put(key, std::move(value));
  return true;
}

std::optional<Value> LsmIndex::rmw(const Key& key, Value new_value) {
  check_value(new_value);
  auto old = read(key);
  if (!old) return std::nullopt;
  put(key, std::move(new_value));
  return old;
}

std::vector<Record> LsmIndex::scan(const Key& start, std::size_t count) const {
  // The first `count` distinct keys overall are among the first `count` keys
  // of each source, so bounded per-source windows suffice. Newest source wins.
  std::map<Key, const Value*> window;
  for (std::size_t i = levels_.size(); i-- > 0;) {
    const auto& recs = levels_[i].records;
    auto it = std::lower_bound(recs.begin(), recs.end(), start,
                               [](const Record& r, const Key& k) { return r.first < k; });
    for (std::size_t taken = 0; it != recs.end() && taken < count; ++it, ++taken) {
      window[it->first] = &it->second;
    }
  }
  auto it = memtable_.lower_bound(start);
  for (std::size_t taken = 0; it != memtable_.end() && taken < count; ++it, ++taken) {
    window[it->first] = &it->second;
  }

  std::vector<Record> out;
  out.reserve(std::min(count, window.size()));
  for (const auto& [k, v] : window) {
    if (out.size() == count) break;
    out.emplace_back(k, *v);
  }
  return out;
}

std::size_t LsmIndex::size() const {
  std::vector<Key> keys;
  for (const auto& [k, v] : memtable_) keys.push_back(k);
  for (const auto& run : levels_) {
    for (const auto& r : run.records) keys.push_back(r.first);
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

}  // namespace idxsel
