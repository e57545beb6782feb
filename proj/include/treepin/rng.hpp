#pragma once

#include <cstdint>

namespace treepin {

// splitmix64 finalizer (Steele, Lea & Flood 2014; same avalanche stage as
// MurmurHash3's fmix64 variant).  Fixed for the life of the project: every
// disorder value, replica seed and grid-cell seed is derived through it,
// so changing it changes all published numbers.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Hash of (seed, a, b): golden-ratio increment, then one finalizer pass per
// absorbed word.  Counter-based, order-independent, bit-exact everywhere.
inline std::uint64_t mix_words(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = seed + 0x9e3779b97f4a7c15ULL;
    h = mix64(h + a);
    h = mix64(h + b);
    return h;
}

// Domain separators so that node hashing, replica seeding and grid-cell
// seeding can never collide even for equal counter values.
enum class SeedDomain : std::uint64_t {
    Node = 0x8bb84b93962eacc9ULL,
    Replica = 0x2f4b62612e2b44d9ULL,
    Cell = 0x9e1b83addbf4b2c5ULL,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, SeedDomain domain) {
    return mix_words(master ^ static_cast<std::uint64_t>(domain), index, 0);
}

// Standard-normal quantile, Wichura's algorithm AS 241 (PPND16).
// Absolute error below 1e-15 on (0,1); callers rely on < 1e-9.
double normal_quantile(double p);

}  // namespace treepin
