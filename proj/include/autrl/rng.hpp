#pragma once

#include <cstdint>

namespace autrl {

// splitmix64 step; used to expand seeds into generator state and to derive
// independent stream seeds.
inline uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with explicit seeding. All draws are pinned to this
// implementation so a run is reproducible from its seed across platforms and
// standard-library versions (std::uniform_int_distribution is not).
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased draw from [0, n); n must be positive.
    uint32_t uniform_int(uint32_t n) {
        const uint64_t span = n;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t draw = next_u64();
        while (draw >= limit) draw = next_u64();
        return static_cast<uint32_t>(draw % span);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Deterministically derives the seed of an independent stream.
    static uint64_t derive(uint64_t seed, uint64_t stream) {
        uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        return splitmix64(x);
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t state_[4];
};

}  // namespace autrl
