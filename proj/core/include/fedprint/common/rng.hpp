#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace fedprint {

/// Engine used everywhere randomness is consumed. All streams are explicit.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; good avalanche for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a over the bytes of `s`. Used to turn names into substream keys.
std::uint64_t hash_string(std::string_view s) noexcept;

/// Derives an independent substream seed from a base seed and a key path,
/// e.g. derive_seed(scenario_seed, {tag_id, comm_index}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) noexcept;

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(base, keys));
}

}  // namespace fedprint
