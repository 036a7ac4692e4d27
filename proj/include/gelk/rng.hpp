#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gelk {

/// splitmix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for replica `index` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// mt19937_64 with distributions written out so that streams are identical
/// across standard libraries (Poisson excepted).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Exponential(1).
  double exponential() { return -std::log1p(-uniform()); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }
  std::int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> d(mean);
    return d(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gelk
