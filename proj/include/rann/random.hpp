#pragma once

#include <cstdint>
#include <random>

namespace rann {

/// Seeded pseudo-random stream used everywhere a reproducible draw is needed.
///
/// Engine: std::mt19937_64 (its output sequence is fixed by the C++ standard)
/// seeded with the raw 64-bit seed. Reals are derived from the top 53 bits of
/// each 64-bit word, so draws are bit-identical across standard libraries.
/// std::uniform_*_distribution is deliberately not used because its
/// algorithm is implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n), unbiased (rejection on the top bits).
  std::uint64_t below(std::uint64_t n);

  /// Fair coin.
  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rann
