#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace broadcd {

/// splitmix64 finalizer; used to give independent sub-streams their own seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a; stable across platforms and runs.
constexpr std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Rng = std::mt19937_64;

/// Uniform draw on the closed interval [0, 1].
inline double uniform_closed01(Rng& rng) {
  constexpr std::uint64_t kSteps = std::uint64_t{1} << 53;
  std::uniform_int_distribution<std::uint64_t> dist(0, kSteps);
  return static_cast<double>(dist(rng)) / static_cast<double>(kSteps);
}

}  // namespace broadcd
