#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "idxsel/errors.hpp"
#include "idxsel/rng.hpp"

namespace idxsel {

struct Transition {
  Eigen::VectorXd state;
  std::size_t action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool terminal = false;
  // Bit a set when action a is legal in next_state; the TD target maxes over
  // legal actions only.
  std::uint32_t next_legal = ~std::uint32_t{0};
};

std::uint32_t legal_bits(const std::vector<bool>& mask);

// Fixed-capacity ring buffer; oldest entries are overwritten first.
class ReplayPool {
 public:
  explicit ReplayPool(std::size_t capacity = 50000) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay pool capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity_, 4096));
  }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
    ++pushed_;
  }

  // batch_size distinct transitions, uniformly; nullopt until the pool holds
  // at least batch_size.
  std::optional<std::vector<Transition>> sample(std::size_t batch_size, Rng& rng) const {
    if (batch_size == 0 || items_.size() < batch_size) return std::nullopt;
    // Partial Fisher-Yates over slot indices.
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<Transition> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      batch.push_back(items_[idx[i]]);
    }
    return batch;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t pushed() const { return pushed_; }
  // Slot-ordered storage, for inspection.
  const std::vector<Transition>& items() const { return items_; }
  // Oldest-first view of the stored transitions.
  std::vector<const Transition*> chronological() const {
    std::vector<const Transition*> out;
    out.reserve(items_.size());
    const std::size_t start = items_.size() < capacity_ ? 0 : cursor_;
    for (std::size_t i = 0; i < items_.size(); ++i) out.push_back(&items_[(start + i) % items_.size()]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t cursor_ = 0;
  std::size_t pushed_ = 0;
};

inline std::uint32_t legal_bits(const std::vector<bool>& mask) {
  if (mask.size() > 32) throw ConfigError("action masks are limited to 32 actions");
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) bits |= std::uint32_t{1} << i;
  }
  return bits;
}

}  // namespace idxsel
