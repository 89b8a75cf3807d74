#include "idxsel/hash_index.hpp"

#include <algorithm>

#include "idxsel/errors.hpp"

namespace idxsel {

HashIndex::HashIndex(IndexConfig config, std::size_t bucket_count, IndexOptions options)
    : Index(std::move(config), options), buckets_(bucket_count) {
  if (bucket_count == 0) throw ConfigError("hash bucket_count must be positive");
}

HashIndex::Bucket& HashIndex::bucket(const Key& key) {
  return buckets_[fnv1a(key.view()) % buckets_.size()];
}

const HashIndex::Bucket& HashIndex::bucket(const Key& key) const {
  return buckets_[fnv1a(key.view()) % buckets_.size()];
}

Value* HashIndex::find(const Key& key) {
  for (auto& [k, v] : bucket(key)) {
    if (k == key) return &v;
  }
  return nullptr;
}

const Value* HashIndex::find(const Key& key) const {
  for (const auto& [k, v] : bucket(key)) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::optional<Value> HashIndex::read(const Key& key) const {
  if (const Value* v = find(key)) return *v;
  return std::nullopt;
}

void HashIndex::insert(const Key& key, Value value) {
  check_value(value);
  if (Value* v = find(key)) {
    *v = std::move(value);
    return;
  }
  check_capacity(size_);
  bucket(key).emplace_back(key, std::move(value));
  ++size_;
}

bool HashIndex::update(const Key& key, Value value) {
  check_value(value);
  Value* v = find(key);
  if (!v) return false;
  *v = std::move(value);
  return true;
}

std::vector<Record> HashIndex::scan(const Key& start, std::size_t count) const {
  std::vector<const Record*> matches;
  for (const auto& b : buckets_) {
    for (const auto& rec : b) {
      if (rec.first >= start) matches.push_back(&rec);
    }
  }
  const auto take = std::min(count, matches.size());
  const auto by_key = [](const Record* a, const Record* b) { return a->first < b->first; };
  std::partial_sort(matches.begin(), matches.begin() + static_cast<std::ptrdiff_t>(take),
                    matches.end(), by_key);
  std::vector<Record> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(*matches[i]);
  return out;
}

std::optional<Value> HashIndex::rmw(const Key& key, Value new_value) {
  check_value(new_value);
  Value* v = find(key);
  if (!v) return std::nullopt;
  return std::exchange(*v, std::move(new_value));
}

}  // namespace idxsel
