#pragma once

// Counter-based random numbers shared by every stochastic component.
//
// Bits come from the SplitMix64 finalizer applied to a key built from
// (seed, level, step, component); Gaussians use the cosine branch of the
// Box-Muller transform. Both are pure integer/IEEE arithmetic, so results
// do not depend on the standard library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace nlflow::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (a + kGolden));
  h = mix64(h ^ (b + 2 * kGolden));
  return mix64(h ^ (c + 3 * kGolden));
}

/// Uniform on ]0, 1] with 53 random bits.
inline double uniform_open0(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal keyed by `k`.
inline double gaussian(std::uint64_t k) noexcept {
  const double u1 = uniform_open0(mix64(k ^ 0x5851F42D4C957F2DULL));
  const double u2 = uniform_open0(mix64(k ^ 0x14057B7EF767814FULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential stream (SplitMix64) for sampling tasks that need no keying.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }
  double uniform() noexcept { return uniform_open0(next()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * (1.0 - uniform()); }
  double normal() noexcept { return gaussian(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace nlflow::rng
