#pragma once

#include <cstdint>

namespace proxyeval {

/// Splittable counter-based random source. Each stream is a 64-bit key;
/// child(word) derives an independent stream, unit(counter) reads the
/// counter-th variate of the stream. Draws depend only on (key path,
/// counter), so parallel consumers are reproducible by construction.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : key_(mix(seed ^ kSeedSalt)) {}

    /// Derives the substream identified by `word` (e.g. a trial index,
    /// a system index, a song index), independent of this stream.
    SplitRng child(std::uint64_t word) const {
        return SplitRng(mix(key_ ^ mix(word + kChildSalt)), 0);
    }

    /// The counter-th uniform variate of this stream, strictly inside
    /// (0,1) so it is safe to feed through an inverse CDF.
    double unit(std::uint64_t counter) const {
        const std::uint64_t bits = mix(key_ + counter * kCounterSalt);
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return mix(key_ + counter * kCounterSalt);
    }

private:
    SplitRng(std::uint64_t key, int) : key_(key) {}

    // 64-bit finalizer with full avalanche (murmur3 fmix64).
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        x *= 0xc4ceb9fe1a85ec53ULL;
        x ^= x >> 33;
        return x;
    }

    static constexpr std::uint64_t kSeedSalt = 0x9e3779b97f4a7c15ULL;
    static constexpr std::uint64_t kChildSalt = 0xbf58476d1ce4e5b9ULL;
    static constexpr std::uint64_t kCounterSalt = 0x94d049bb133111ebULL;

    std::uint64_t key_;
};

}  // namespace proxyeval
