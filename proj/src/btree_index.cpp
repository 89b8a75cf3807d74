#include "idxsel/btree_index.hpp"

#include <algorithm>

#include "idxsel/errors.hpp"

namespace idxsel {

struct BTreeIndex::Node {
  bool leaf = true;
  std::vector<Key> keys;
  // Leaves: values[i] belongs to keys[i].
  std::vector<Value> values;
  // Internal: children.size() == keys.size() + 1; keys[i] is the smallest
  // key reachable through children[i + 1].
  std::vector<std::unique_ptr<Node>> children;
  Node* next = nullptr;
};

struct BTreeIndex::Split {
  Key separator;
  std::unique_ptr<Node> right;
};

BTreeIndex::BTreeIndex(IndexConfig config, std::size_t fanout, IndexOptions options)
    : Index(std::move(config), options), fanout_(fanout), root_(std::make_unique<Node>()) {
  if (fanout_ < 3) throw ConfigError("btree fanout must be at least 3");
}

BTreeIndex::~BTreeIndex() = default;

std::size_t BTreeIndex::height() const {
  std::size_t h = 1;
  for (const Node* n = root_.get(); !n->leaf; n = n->children.front().get()) ++h;
  return h;
}

const BTreeIndex::Node* BTreeIndex::leaf_for(const Key& key) const {
  const Node* node = root_.get();
  while (!node->leaf) {
    const auto it = std::upper_bound(node->keys.begin(), node->keys.end(), key);
    node = node->children[static_cast<std::size_t>(it - node->keys.begin())].get();
  }
  return node;
}

Value* BTreeIndex::find(const Key& key) const {
  auto* leaf = const_cast<Node*>(leaf_for(key));
  const auto it = std::lower_bound(leaf->keys.begin(), leaf->keys.end(), key);
  if (it == leaf->keys.end() || *it != key) return nullptr;
  return &leaf->values[static_cast<std::size_t>(it - leaf->keys.begin())];
}

std::optional<Value> BTreeIndex::read(const Key& key) const {
  if (const Value* v = find(key)) return *v;
  return std::nullopt;
}

std::unique_ptr<BTreeIndex::Split> BTreeIndex::insert_into(Node& node, const Key& key,
                                                           Value& value, bool& inserted) {
  if (node.leaf) {
    const auto it = std::lower_bound(node.keys.begin(), node.keys.end(), key);
    const auto pos = static_cast<std::size_t>(it - node.keys.begin());
    if (it != node.keys.end() && *it == key) {
      node.values[pos] = std::move(value);
      inserted = false;
      return nullptr;
    }
    check_capacity(size_);
    node.keys.insert(it, key);
    node.values.insert(node.values.begin() + static_cast<std::ptrdiff_t>(pos), std::move(value));
    inserted = true;
    if (node.keys.size() <= fanout_) return nullptr;

    const std::size_t mid = node.keys.size() / 2;
    auto right = std::make_unique<Node>();
    right->leaf = true;
    right->keys.assign(node.keys.begin() + static_cast<std::ptrdiff_t>(mid), node.keys.end());
    right->values.assign(std::make_move_iterator(node.values.begin() + static_cast<std::ptrdiff_t>(mid)),
                         std::make_move_iterator(node.values.end()));
    node.keys.resize(mid);
    node.values.resize(mid);
    right->next = node.next;
    node.next = right.get();
    Key sep = right->keys.front();
    return std::make_unique<Split>(Split{sep, std::move(right)});
  }

  const auto it = std::upper_bound(node.keys.begin(), node.keys.end(), key);
  const auto child = static_cast<std::size_t>(it - node.keys.begin());
  auto split = insert_into(*node.children[child], key, value, inserted);
  if (!split) return nullptr;

  node.keys.insert(node.keys.begin() + static_cast<std::ptrdiff_t>(child), split->separator);
  node.children.insert(node.children.begin() + static_cast<std::ptrdiff_t>(child) + 1,
                       std::move(split->right));
  if (node.children.size() <= fanout_) return nullptr;

  // Internal split: the middle key moves up.
  const std::size_t mid = node.keys.size() / 2;
  auto right = std::make_unique<Node>();
  right->leaf = false;
  Key up = node.keys[mid];
  right->keys.assign(node.keys.begin() + static_cast<std::ptrdiff_t>(mid) + 1, node.keys.end());
  for (std::size_t i = mid + 1; i < node.children.size(); ++i) {
    right->children.push_back(std::move(node.children[i]));
  }
  node.keys.resize(mid);
  node.children.resize(mid + 1);
  return std::make_unique<Split>(Split{up, std::move(right)});
}

void BTreeIndex::insert(const Key& key, Value value) {
  check_value(value);
  bool inserted = false;
  auto split = insert_into(*root_, key, value, inserted);
  if (inserted) ++size_;
  if (split) {
    auto root = std::make_unique<Node>();
    root->leaf = false;
    root->keys.push_back(split->separator);
    root->children.push_back(std::move(root_));
    root->children.push_back(std::move(split->right));
    root_ = std::move(root);
  }
}

bool BTreeIndex::update(const Key& key, Value value) {
  check_value(value);
  Value* slot = find(key);
  if (!slot) return false;
  *slot = std::move(value);
  return true;
}

std::vector<Record> BTreeIndex::scan(const Key& start, std::size_t count) const {
  std::vector<Record> out;
  if (count == 0) return out;
  const Node* leaf = leaf_for(start);
  auto pos = static_cast<std::size_t>(
      std::lower_bound(leaf->keys.begin(), leaf->keys.end(), start) - leaf->keys.begin());
  while (leaf && out.size() < count) {
    for (; pos < leaf->keys.size() && out.size() < count; ++pos) {
      out.emplace_back(leaf->keys[pos], leaf->values[pos]);
    }
    leaf = leaf->next;
    pos = 0;
  }
  return out;
}

std::optional<Value> BTreeIndex::rmw(const Key& key, Value new_value) {
  check_value(new_value);
  Value* slot = find(key);
  if (!slot) return std::nullopt;
  Value old = std::exchange(*slot, std::move(new_value));
  return old;
}

}  // namespace idxsel
