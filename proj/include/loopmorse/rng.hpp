#pragma once

#include <cstdint>

namespace loopmorse {

// Counter-based generator: every draw is a stateless mix of
// (seed, stream key, counter), so per-task streams are reproducible
// no matter how tasks are scheduled across threads.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stage, std::uint64_t task)
        : key_(mix(mix(seed ^ 0x9e3779b97f4a7c15ull, stage), task)), counter_(0) {}

    std::uint64_t next_u64() { return mix(key_, ++counter_); }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform in [-1,1)
    double symmetric() { return 2.0 * next_double() - 1.0; }

    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    // splitmix64 finalizer applied to a combined word
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

// Stage keys for stream separation.
namespace rng_stage {
constexpr std::uint64_t kOrbitSeeds = 1;
constexpr std::uint64_t kFlowSphere = 2;
constexpr std::uint64_t kPropertySweep = 3;
constexpr std::uint64_t kVariation = 4;
} // namespace rng_stage

} // namespace loopmorse
