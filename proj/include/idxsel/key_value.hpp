#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace idxsel {

inline constexpr std::size_t kKeyWidth = 16;
inline constexpr std::size_t kDefaultValueBytes = 100;

// Fixed-width key: a zero-padded decimal record id, ordered bytewise.
class Key {
 public:
  Key() { bytes_.fill('0'); }

  static Key from_id(std::uint64_t id);
  // Accepts up to kKeyWidth bytes; shorter input is left-padded with '0'.
  static Key from_string(std::string_view text);

  std::string_view view() const { return {bytes_.data(), bytes_.size()}; }
  std::string str() const { return std::string(view()); }
  const std::array<char, kKeyWidth>& bytes() const { return bytes_; }

  friend bool operator==(const Key&, const Key&) = default;
  friend std::strong_ordering operator<=>(const Key& a, const Key& b) {
    return a.view() <=> b.view();
  }

 private:
  std::array<char, kKeyWidth> bytes_;
};

using Value = std::string;
using Record = std::pair<Key, Value>;

// Deterministic payload of the given size derived from a seed.
Value make_value(std::uint64_t seed, std::size_t size = kDefaultValueBytes);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace idxsel
