#pragma once

#include <cstdint>
#include <span>

namespace smore {

// Named streams hanging off one user seed. Adding a stream never perturbs
// draws from the others.
inline constexpr std::uint64_t kStreamAnchors = 1;
inline constexpr std::uint64_t kStreamSignatures = 2;
inline constexpr std::uint64_t kStreamShuffle = 3;
inline constexpr std::uint64_t kStreamSynthClass = 4;
inline constexpr std::uint64_t kStreamSynthDomain = 5;
inline constexpr std::uint64_t kStreamSynthNoise = 6;
inline constexpr std::uint64_t kStreamFolds = 7;
inline constexpr std::uint64_t kStreamSubsample = 8;
inline constexpr std::uint64_t kStreamTest = 9;

/// SplitMix64 finalizer; the building block of every deterministic draw.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// A cheap counter-based word stream. Two sequences built from the same key
/// emit identical words, so any draw is reproducible without shared state.
class RngSequence {
public:
    explicit RngSequence(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() { return mix64(state_++); }

    /// Uniform double in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

    /// Standard normal via Box-Muller (consumes two words).
    double next_gaussian();

private:
    std::uint64_t state_;
};

/// Seeded hypervector source. A draw is addressed by (seed, stream, index);
/// the same address always yields the identical vector, from any thread.
class HvRng {
public:
    HvRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Word sequence for draw `index`, independent of every other index.
    RngSequence sequence(std::uint64_t index) const {
        std::uint64_t key = mix64(seed_ + 0x632be59bd9b4e019ULL * (stream_ + 1));
        return RngSequence(mix64(key + 0x9e3779b97f4a7c15ULL * (index + 1)));
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Deterministic Fisher-Yates shuffle driven by `seq`.
void shuffle_indices(std::span<std::uint32_t> indices, RngSequence& seq);

}  // namespace smore
