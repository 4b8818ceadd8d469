#pragma once

#include <cstdint>
#include <random>

namespace semoran {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` under `root`. Results do not depend on the
/// order in which children are requested.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return mix64(mix64(root) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Stream tags, so unrelated consumers of one root seed never collide.
namespace stream {
inline constexpr std::uint64_t positions = 1;
inline constexpr std::uint64_t packets = 2;
inline constexpr std::uint64_t split = 3;
inline constexpr std::uint64_t init = 4;
inline constexpr std::uint64_t shuffle = 5;
inline constexpr std::uint64_t reparam = 6;
inline constexpr std::uint64_t channel = 7;
}  // namespace stream

}  // namespace semoran
