#pragma once

#include <cstdint>
#include <random>

namespace triadic {

// splitmix64 finalizer; platform-independent, unlike std::hash.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

inline constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b), c);
}

inline constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                                     std::uint64_t d) {
    return mix64(mix64(a, b, c), d);
}

// Maps the top 53 bits to [0, 1).
inline double unit_real(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Stateless per-key decisions: every accept/reject in a sampler is a pure
// function of (seed, key), which makes probabilistic claims replayable and
// keeps repeated offers of the same key consistent.
struct DecisionHash {
    std::uint64_t seed = 0;

    bool bernoulli(double p, std::uint64_t k1, std::uint64_t k2 = 0,
                   std::uint64_t k3 = 0) const {
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        return unit_real(mix64(seed, k1, k2, k3)) < p;
    }

    std::uint32_t uniform_int(std::uint32_t n, std::uint64_t k1, std::uint64_t k2 = 0) const {
        return static_cast<std::uint32_t>(mix64(seed, k1, k2) % n);
    }
};

// General-purpose generator for Monte-Carlo harness code (synthesis, spam
// injection, trial sweeps). One instance per trial, seeded explicitly.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix64(seed, stream));
}

}  // namespace triadic
