#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sdeflow {

// Stateless counter-based random numbers. Every draw is a pure function of
// (seed, counter), so streams can be split, shifted and replayed without
// carrying generator state across threads.

inline std::uint64_t mix64(std::uint64_t z) {
    // Stafford variant 13 of the splitmix64 finalizer.
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a + 0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
}

// Seed derivation for subcommands / replicas: hash of (base seed, tag, index).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
    std::uint64_t h = mix64(base ^ 0x5851f42d4c957f2dULL);
    for (char c : tag)
        h = hash_combine(h, static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return hash_combine(h, index);
}

// Map 64 random bits to (0, 1]; never returns 0 so log() is safe.
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Standard normal draw for a given counter, via Box-Muller on two
// independently mixed uniforms.
inline double standard_normal(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t k = mix64(seed ^ (counter * 0xd6e8feb86659fd93ULL));
    const double u1 = uniform01(mix64(k ^ 0x2545f4914f6cdd1dULL));
    const double u2 = uniform01(mix64(k + 0x9e3779b97f4a7c15ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace sdeflow
