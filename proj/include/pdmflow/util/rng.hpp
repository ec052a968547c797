#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pdmflow {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mix a stream index into a base seed (per-cycle, per-tree, per-class substreams).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return splitmix64(s);
}

// xorshift64* — Marsaglia shifts 12/25/27, output multiplier 2685821657736338717.
// Identical sequences on every platform; the seed is pre-whitened with splitmix64
// so seed 0 and small seeds are usable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        state_ = splitmix64(s);
        if (state_ == 0) state_ = 0x106689d45497fdb5ULL;
    }

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 2685821657736338717ULL;
    }

    // Uniform in (0, 1] — never 0, safe under log().
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // below(n): uniform integer in [0, n). Modulo bias is irrelevant at our n.
    std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

    // Box–Muller, cosine branch only, so every draw consumes exactly two uniforms.
    double gaussian() {
        const double u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace pdmflow
