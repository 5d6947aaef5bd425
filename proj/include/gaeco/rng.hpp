#pragma once

#include <cstdint>
#include <random>

namespace gaeco {

using Rng = std::mt19937_64;

/// Consumers of the run seed. Each gets its own stream so that toggling one
/// consumer leaves the draws of the others untouched.
enum class Stream : std::uint64_t {
    kInit = 1,
    kDropout = 2,
    kKmeans = 3,
    kNegativeSampling = 4,
};

/// Independent generator for (seed, stream) via splitmix64 mixing.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return Rng(z);
}

inline Rng derive_rng(std::uint64_t seed, Stream stream) {
    return derive_rng(seed, static_cast<std::uint64_t>(stream));
}

/// Uniform double in [0, 1) from the top 53 bits; identical across standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; identical across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    while (true) {
        const std::uint64_t r = rng();
        if (r >= limit) return r % bound;
    }
}

} // namespace gaeco
