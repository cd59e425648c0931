#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace searchlab {

// All randomness flows through mt19937_64 plus the fixed derivations below.
// std::mt19937_64 output is specified bit-for-bit by the standard, and none
// of the std::*_distribution classes (which are implementation-defined) are
// used, so identical seeds give identical draws on every platform.
using Rng = std::mt19937_64;

inline constexpr std::string_view kRngAlgorithmId = "mt19937_64";

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double next_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) by rejection; bound must be nonzero.
inline std::uint64_t bounded_uint(Rng& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

// Standard normal via Box-Muller on two portable uniforms.
inline double next_gaussian(Rng& rng) {
  double u1 = next_double(rng);
  while (u1 <= 0.0) u1 = next_double(rng);
  const double u2 = next_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Deterministic child seed for stream `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return detail::splitmix64(detail::splitmix64(master) ^ detail::splitmix64(index));
}

}  // namespace searchlab
