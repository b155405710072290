#pragma once

// Deterministic random sources. Two flavours:
//  - Rng: a sequential splitmix64 stream for bulk sampling (disorder,
//    cascades, optimizer restarts).
//  - pair_u01 / pair_key: a counter-based value keyed by (seed, i, j) so
//    per-edge draws do not depend on iteration order. This is what makes
//    coupled graph sampling exact: both graphs read the same uniform.

#include <cmath>
#include <cstdint>

namespace potts {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t x) {
    uint64_t s = x;
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0,1)
    double u01() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1], safe under log()
    double u01_open() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01_open();
        double u2 = u01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(u01_open()); }

    // integer in [0, n)
    uint64_t below(uint64_t n) { return next_u64() % n; }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable key for the unordered pair {i,j} under the given seed.
inline uint64_t pair_key(uint64_t seed, uint64_t i, uint64_t j) {
    if (i > j) {
        uint64_t t = i;
        i = j;
        j = t;
    }
    uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ (i * 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (j * 0xc2b2ae3d27d4eb4fULL));
    return h;
}

inline double pair_u01(uint64_t seed, uint64_t i, uint64_t j) {
    return (pair_key(seed, i, j) >> 11) * 0x1.0p-53;
}

}  // namespace potts
