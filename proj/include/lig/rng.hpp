#pragma once

#include <cstdint>
#include <random>

namespace lig {

using Rng = std::mt19937_64;

/// splitmix64 finalizer. Used to fold experiment coordinates into
/// per-trial seeds so workers never share generator state.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t seed_chain(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ mix64(v));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). Rejection sampled, no modulo bias.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t accept = (UINT64_MAX / bound) * bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= accept);
  return r % bound;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace lig
