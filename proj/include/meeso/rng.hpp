#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace meeso {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Mixes a base seed with stream coordinates into an independent seed.
inline std::int64_t derive_seed(std::int64_t base, std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t s = splitmix64(static_cast<std::uint64_t>(base));
    for (std::uint64_t p : parts) s = splitmix64(s ^ splitmix64(p + 0x632BE59BD9B4E019ull));
    return static_cast<std::int64_t>(s >> 1);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::int64_t seed) { return Rng(static_cast<std::uint64_t>(seed)); }

}  // namespace meeso
