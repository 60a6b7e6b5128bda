#pragma once

// Deterministic per-replicate random substreams.
//
// A substream is addressed by (master seed, unit, index).  The generator
// seed is derived by chaining the splitmix64 finalizer:
//
//     s = mix(mix(mix(master) ^ mix(unit + G1)) ^ mix(index + G2))
//
// with G1 = 0x9E3779B97F4A7C15 and G2 = 0xD1B54A32D192ED03, and mix the
// standard splitmix64 avalanche.  The stream itself is std::mt19937_64,
// which the standard pins down bit-for-bit, and all variates below are
// built on raw 64-bit draws only, so every sampled object is reproducible
// across platforms and thread counts.

#include <cstdint>
#include <random>

namespace rset {

inline uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t substream_seed(uint64_t master, uint64_t unit, uint64_t index) {
    uint64_t s = splitmix64(master);
    s = splitmix64(s ^ splitmix64(unit + 0x9E3779B97F4A7C15ull));
    s = splitmix64(s ^ splitmix64(index + 0xD1B54A32D192ED03ull));
    return s;
}

class Substream {
public:
    Substream(uint64_t master, uint64_t unit, uint64_t index = 0)
        : gen_(substream_seed(master, unit, index)) {}

    uint64_t next_u64() { return gen_(); }

    // uniform on [0,1) with 53 random bits
    double next_unit() {
        return double(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    bool bernoulli(double p) { return next_unit() < p; }

    // Poisson variate; sequential inversion below mean 10, transformed
    // rejection above
    uint64_t poisson(double mean);

private:
    std::mt19937_64 gen_;
};

} // namespace rset
