#ifndef IVAE_COMMON_RNG_H_
#define IVAE_COMMON_RNG_H_

#include <cstdint>
#include <random>

namespace ivae {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of stream `stream`, item `index`, under a base seed. Every random
// consumer in the library gets its own derived seed, so runs never share a
// stream.
inline std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream,
                                std::uint64_t index = 0) {
  return SplitMix64(SplitMix64(SplitMix64(base) ^ stream) + index);
}

inline double StandardNormal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double Uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

}  // namespace ivae

#endif  // IVAE_COMMON_RNG_H_
