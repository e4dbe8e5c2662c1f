#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace acnmp {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Derives a decorrelated sub-stream seed (splitmix64 finalizer) so that
// per-rollout / per-trajectory generators can be rebuilt independently.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Inclusive bounds.
inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Box-Muller without cached state: one sample consumes exactly two uniform
// draws, which keeps sequences reproducible across call sites.
inline double normal(Rng& rng) {
  const double u1 = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double u2 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline double normal(Rng& rng, double mean, double stddev) {
  return mean + stddev * normal(rng);
}

}  // namespace acnmp
