#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace idxsel {

// Seeded engine with distribution helpers implemented here rather than via
// <random> distributions, whose outputs differ across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(mix(seed)) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // [0, n), unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // Exp(1).
  double exponential() { return -std::log1p(-uniform()); }

  // Independent child stream, e.g. one per episode or subsystem.
  Rng fork(std::uint64_t salt) { return Rng(next() ^ mix(salt)); }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace idxsel
