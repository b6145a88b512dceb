#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace uts {

// All randomized routines draw from std::mt19937_64 through the helpers
// below. The std distributions are deliberately avoided: their output is
// implementation-defined, and identical (cloud, seed) pairs must yield
// identical samples on every platform.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable 64-bit hash for descriptor ids, used to derive per-descriptor
// sub-seeds from one signature seed.
inline std::uint64_t hash64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    return splitmix64(seed ^ hash64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x51ed270b0a5ff1ddULL));
}

// Unbiased integer in [0, bound) by rejection sampling.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

// Uniform double in [0, 1).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (one value per call; the sine branch is
// discarded so the stream stays easy to reason about).
inline double gaussian(std::mt19937_64& rng) {
    double u;
    do {
        u = uniform01(rng);
    } while (u <= 0.0);
    const double v = uniform01(rng);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u)) * std::cos(two_pi * v);
}

} // namespace uts
