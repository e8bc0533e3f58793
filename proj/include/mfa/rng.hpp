#pragma once

#include <cstdint>

namespace mfa {

/// SplitMix64 (Steele, Lea, Flood). Tiny, seedable, identical on every platform;
/// the synthetic-data outputs are part of the test contract, so std:: engines
/// (whose streams are implementation-defined for distributions) are avoided.
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Modulo bias is < bound / 2^64, irrelevant here.
    uint64_t below(uint64_t bound) { return next() % bound; }
};

/// Independent deterministic stream for substream `index` of a master seed.
/// Used to make per-date generation order-free (and therefore parallelizable).
inline SplitMix64 substream(uint64_t seed, uint64_t index) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return SplitMix64(g.next());
}

} // namespace mfa
