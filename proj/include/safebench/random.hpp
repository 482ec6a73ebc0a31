#pragma once

#include <cstdint>
#include <random>

namespace safebench {

using Rng = std::mt19937_64;

/// Independent purposes a run draws randomness for. Each gets its own stream.
enum class Stream : std::uint64_t {
  SeedSampling = 1,
  Noise = 2,
  Algorithm = 3,
};

/// Mixes (master seed, run index, stream) into a 64-bit engine seed.
///
/// Each component is folded in through a splitmix64 round so that adjacent
/// run indices and streams yield unrelated engine states:
///   s = mix(mix(mix(master) ^ run_index) ^ stream)
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index, Stream stream);

inline Rng make_rng(std::uint64_t master_seed, std::uint64_t run_index, Stream stream) {
  return Rng(derive_seed(master_seed, run_index, stream));
}

}  // namespace safebench
