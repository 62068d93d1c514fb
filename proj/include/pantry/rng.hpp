#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pantry {

// Deterministic random numbers. std::mt19937_64 is specified bit-for-bit by
// the standard, but the std distributions are not, so every mapping from raw
// engine output to a value lives here and nowhere else:
//
//   uniform double in [0,1):  (engine() >> 11) * 2^-53
//   uniform double in [a,b):  a + u01 * (b - a)
//   bounded integer in [0,n): engine() % n   (bias ~n/2^64, irrelevant here)
//
// Streams derived from a (seed, index) pair are decorrelated with splitmix64.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream keyed by (seed, index); same pair, same stream.
  static Rng keyed(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  bool coin() { return (engine_() & 1ull) != 0; }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pantry
