#pragma once

#include <cstdint>
#include <vector>

namespace treid {

// Deterministic, platform-stable random number generation. All randomized
// pieces of the toolchain (trial splits, synthetic data) draw from these
// generators so that a (seed, stream) pair reproduces bit-identically on
// any platform. Algorithms: splitmix64 for seeding, xoshiro256++ for the
// main stream, Box-Muller over the uniform stream for Gaussians.

struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : s_) w = sm.next();
    }

    // Independent stream for (seed, stream_index), e.g. one per trial.
    static Xoshiro256pp for_stream(std::uint64_t seed, std::uint64_t stream) {
        return Xoshiro256pp(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n), n >= 1. Rejection sampling keeps the
    // draw exact and platform-independent.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % n;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

// Standard-normal stream via Box-Muller; the cached second deviate makes
// consumption order part of the deterministic contract.
class GaussianStream {
public:
    explicit GaussianStream(Xoshiro256pp rng) : rng_(rng) {}

    double next();

private:
    Xoshiro256pp rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// In-place Fisher-Yates shuffle driven by the given generator.
template <typename T>
void shuffle(std::vector<T>& v, Xoshiro256pp& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

}  // namespace treid
