#pragma once

#include <cstdint>

namespace fpc {

/// Stateless counter-based mixing. Every random quantity in the project is
/// a pure function of (seed, structured key), so lazy evaluation, replay
/// and parallel sweeps all see identical randomness with no generator
/// state to thread through.
namespace rng {

// splitmix64 finalizer: full-avalanche 64-bit mixer.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Absorb one word into a running hash state.
inline uint64_t absorb(uint64_t state, uint64_t word) {
    return mix64(state ^ (word * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
}

/// Double in [0,1) from the top 53 bits.
inline double to_unit(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Uniform in [0,1) from a seed and up to four key words.
inline double unit(uint64_t seed, uint64_t k0, uint64_t k1 = 0, uint64_t k2 = 0,
                   uint64_t k3 = 0) {
    uint64_t h = mix64(seed);
    h = absorb(h, k0);
    h = absorb(h, k1);
    h = absorb(h, k2);
    h = absorb(h, k3);
    return to_unit(h);
}

/// Small stateful helper for test/experiment sampling (not used for edge
/// variates). Deterministic sequence from a seed.
class Sequence {
public:
    explicit Sequence(uint64_t seed) : state_(mix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL)) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    double next_unit() { return to_unit(next_u64()); }

    /// Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

private:
    uint64_t state_;
};

}  // namespace rng
}  // namespace fpc
