#pragma once

#include <cstdint>

namespace fetreg {

/// Stateless counter-based generator built on the SplitMix64 finalizer.
/// Every draw is a pure function of (seed, stream, counter), so parallel or
/// out-of-order generation reproduces identical values and the same seed is
/// portable across platforms (only integer arithmetic is involved; the
/// normal() transform uses libm and is reproducible per-platform).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(mix(seed) ^ (0x9E3779B97F4A7C15ULL * (stream + 1)))) {}

    /// Raw 64-bit draw for counter i.
    std::uint64_t bits(std::uint64_t i) const { return mix(key_ ^ (i + 1)); }

    /// Uniform in [0,1): top 53 bits of the draw.
    double uniform(std::uint64_t i) const {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo,hi).
    double uniform(std::uint64_t i, double lo, double hi) const {
        return lo + (hi - lo) * uniform(i);
    }

    /// Standard normal via Box-Muller from counters (2i, 2i+1).
    double normal(std::uint64_t i) const;

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t key_;
};

}  // namespace fetreg
