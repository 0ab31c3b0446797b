#pragma once

#include <cstdint>
#include <random>

namespace citkit::detail {

// Seeded random source with portable derived draws.
//
// std::mt19937_64 output is pinned by the standard, but the standard
// distributions are not; bounded ints and unit doubles are derived here so
// the same seed yields the same suite on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  int below(int n) {
    // Multiply-shift reduction; bias is negligible for desk-scale n and,
    // more importantly, the mapping is identical everywhere.
    const auto x = next();
    return static_cast<int>(
        (static_cast<unsigned __int128>(x) * static_cast<unsigned>(n)) >> 64);
  }

  // Uniform double in [0, 1).
  double unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace citkit::detail
