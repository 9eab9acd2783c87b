#pragma once

#include <cstdint>
#include <random>

namespace grouse {

/// Seeded random stream used throughout the library.
using Rng = std::mt19937_64;

/// Mixes a master seed and a stream index into an independent 64-bit seed
/// (splitmix64 finalizer applied twice). Used for per-trial and per-chunk
/// streams so results never depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace grouse
