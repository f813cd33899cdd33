#pragma once

#include <cstdint>
#include <random>

namespace featforge {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent stream seed for (seed, purpose, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ purpose) ^ index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, purpose, index));
}

/// Stream tags, so that different consumers of one seed never share draws.
namespace stream {
inline constexpr std::uint64_t walk_order = 1;
inline constexpr std::uint64_t walk_step = 2;
inline constexpr std::uint64_t skipgram_init = 3;
inline constexpr std::uint64_t skipgram_train = 4;
inline constexpr std::uint64_t svd_test_matrix = 5;
inline constexpr std::uint64_t spectral_start = 6;
inline constexpr std::uint64_t split = 7;
inline constexpr std::uint64_t shuffle = 8;
}  // namespace stream

}  // namespace featforge
