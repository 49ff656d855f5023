#pragma once

#include <cstdint>
#include <random>

namespace breather {

/// splitmix64 finalizer; the derivation step for child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic child seed for stream `index` under `parent`. Distinct
/// (parent, index) pairs give statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits; bit-exact across platforms
/// (std::uniform_real_distribution is not).
inline double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace breather
