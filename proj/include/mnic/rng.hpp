#pragma once

#include <cstdint>
#include <random>

namespace mnic {

// splitmix64 step. Used to derive independent per-trial seeds from a base
// seed and a counter, so Monte Carlo trials can run in any order (or in
// parallel) and still reproduce bit-for-bit.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    return mix64(base ^ mix64(counter + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

} // namespace mnic
