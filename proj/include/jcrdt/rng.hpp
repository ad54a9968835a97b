#pragma once

#include <cstdint>
#include <vector>

namespace jcrdt {

/// Deterministic pseudo-random generator used by the simulator and the
/// trace generator. The algorithm is SplitMix64, pinned here so that traces
/// replay identically across platforms and implementations:
///
///   state  := state + 0x9E3779B97F4A7C15
///   z      := state
///   z      := (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
///   z      := (z XOR (z >> 27)) * 0x94D049BB133111EB
///   output := z XOR (z >> 31)
///
/// All arithmetic is modulo 2^64. Bounded draws use the remainder of the
/// raw output, which is deterministic even though slightly biased.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform-ish integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  /// Index drawn according to the given non-negative weights.
  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return 0;
    double x = unit() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      x -= weights[i];
      if (x < 0.0) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace jcrdt
