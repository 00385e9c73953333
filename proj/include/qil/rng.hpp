#pragma once

// Deterministic random utilities. All sampling goes through these helpers
// instead of std:: distributions so that results are reproducible across
// standard library versions, and so that independent streams can be derived
// from (seed, stream id) pairs without correlation.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qil {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a well-mixed seed from a base seed and up to two stream indices.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL + a));
    h = splitmix64(h ^ (0xc2b2ae3d27d4eb4fULL + b));
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    return std::mt19937_64(mix_seed(seed, a, b));
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Standard normal via Box-Muller. Draws two uniforms per call; slightly
// wasteful but stateless, which keeps parallel streams independent.
inline double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline int randint(std::mt19937_64& rng, int n) {
    if (n <= 0) throw std::invalid_argument("randint: n must be positive");
    return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

// Sample an index from an (unnormalized is fine) probability vector.
inline int sample_categorical(std::mt19937_64& rng, const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("sample_categorical: empty probability vector");
    double total = 0.0;
    for (double p : probs) total += p;
    double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace qil
