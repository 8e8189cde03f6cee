#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gtcc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random source. All variate generation is implemented here
/// (instead of <random> distributions) so that a given seed reproduces the
/// same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound), unbiased via rejection. bound must be >= 1.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    bool bernoulli(double p) { return next_unit() < p; }

    /// Number of failures before the next success of a Bernoulli(q) stream,
    /// i.e. a Geometric(q) gap. Requires 0 < q < 1.
    std::uint64_t geometric_gap(double q) {
        const double u = 1.0 - next_unit();  // in (0, 1]
        const double g = std::floor(std::log(u) / std::log1p(-q));
        if (g >= 9.22e18) return UINT64_MAX;
        return static_cast<std::uint64_t>(g);
    }

private:
    static std::uint64_t mix_seed(std::uint64_t seed) {
        std::uint64_t s = seed;
        return splitmix64(s);
    }
    std::mt19937_64 engine_;
};

/// Independent per-stream seed derived from a master seed: the stream index is
/// hashed and XOR-folded into the master so that streams 0,1,2,... do not
/// overlap for any master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_index) {
    std::uint64_t s = stream_index + 0x632be59bd9b4e019ULL;
    const std::uint64_t h = splitmix64(s);
    std::uint64_t m = master ^ h;
    return splitmix64(m);
}

}  // namespace gtcc
