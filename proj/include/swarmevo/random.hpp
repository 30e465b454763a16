#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace swarmevo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; bijective mixing of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based seed derivation. The result depends only on the key values
/// and their order, never on the order in which streams are requested, so
/// concurrent evaluation reproduces serial evaluation exactly.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> key) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto k : key) {
        h = mix64(h ^ mix64(k));
    }
    return h;
}

/// Seed namespaces keep evolution, post-evaluation, scenario and mission
/// streams disjoint even when numeric keys coincide.
namespace seed_tag {
inline constexpr std::uint64_t evolution_trial = 0x45564f4c;   // "EVOL"
inline constexpr std::uint64_t post_evaluation = 0x504f5354;   // "POST"
inline constexpr std::uint64_t reproduction = 0x52455052;      // "REPR"
inline constexpr std::uint64_t initial_population = 0x494e4954;  // "INIT"
inline constexpr std::uint64_t scenario = 0x5343454e;          // "SCEN"
inline constexpr std::uint64_t mission = 0x4d495353;           // "MISS"
}  // namespace seed_tag

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>{lo, hi}(rng);
}

inline double gaussian(Rng& rng, double sigma) {
    if (sigma <= 0.0) {
        return 0.0;
    }
    return std::normal_distribution<double>{0.0, sigma}(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>{lo, hi}(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) {
        return false;
    }
    if (p >= 1.0) {
        return true;
    }
    return uniform(rng, 0.0, 1.0) < p;
}

}  // namespace swarmevo
