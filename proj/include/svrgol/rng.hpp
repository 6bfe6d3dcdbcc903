#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace svrgol {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Fixed constants, seedless,
// identical output on every platform.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// mt19937_64 is fully specified by the standard, so sequences are portable.
// The std distributions are not; every draw below is hand-rolled so that a
// seed pins the byte-exact run.
using Rng = std::mt19937_64;

// Uniform draw in [0, n), n >= 1. Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal, Box-Muller cosine branch. One value per call keeps the
// stream independent of call-site pairing.
inline double gaussian(Rng& rng) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  const double u1 = 1.0 - uniform_unit(rng);  // (0, 1]
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace svrgol
