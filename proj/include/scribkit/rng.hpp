#pragma once

#include <cmath>
#include <cstdint>

namespace scribkit {

/// SplitMix64 generator. Used throughout instead of <random> engines and
/// distributions so that a given seed produces the same stream on every
/// platform and standard library.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next() >> 11) / double(1ull << 53); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Modulo bias is negligible for the small
    /// ranges used here.
    uint64_t index(uint64_t n) { return next() % n; }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Stream decorrelated from (seed, stream_id) pairs.
    static SplitMix64 substream(uint64_t seed, uint64_t stream_id) {
        SplitMix64 mixer(seed);
        mixer.state ^= 0xd1b54a32d192ed03ull * (stream_id + 1);
        mixer.next();
        return mixer;
    }
};

} // namespace scribkit
