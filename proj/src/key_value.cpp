#include "idxsel/key_value.hpp"

#include <algorithm>

#include "idxsel/errors.hpp"

namespace idxsel {

Key Key::from_id(std::uint64_t id) {
  Key key;
  for (std::size_t i = kKeyWidth; i-- > 0 && id != 0;) {
    key.bytes_[i] = static_cast<char>('0' + id % 10);
    id /= 10;
  }
  return key;
}

Key Key::from_string(std::string_view text) {
  if (text.size() > kKeyWidth) {
    throw ConfigError("key longer than " + std::to_string(kKeyWidth) + " bytes");
  }
  Key key;
  std::copy(text.begin(), text.end(), key.bytes_.begin() + (kKeyWidth - text.size()));
  return key;
}

Value make_value(std::uint64_t seed, std::size_t size) {
  Value v(std::max<std::size_t>(size, 1), 'a');
  std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + 1;
  for (auto& c : v) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    c = static_cast<char>('a' + (x >> 59) % 26);
  }
  return v;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace idxsel
