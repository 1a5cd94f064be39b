#pragma once

#include <cstdint>
#include <initializer_list>

namespace hierid {

// SplitMix64 step; used for seeding and for deriving substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with an explicit, documented algorithm so that every stream
// reproduces bit-identically across platforms and standard-library versions.
// Normal deviates use Box-Muller (two uniforms per deviate, no caching, no
// rejection), exponentials use inversion; both are therefore deterministic.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    // Independent substream derived from (seed, key...). Streams with distinct
    // keys are statistically independent regardless of evaluation order, which
    // is what makes parallel generation scheduling-invariant.
    static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> key) noexcept {
        std::uint64_t s = seed;
        std::uint64_t mixed = splitmix64(s);
        for (std::uint64_t k : key) {
            s ^= k * 0x9E3779B97F4A7C15ULL;
            mixed ^= splitmix64(s);
        }
        return Rng(mixed);
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() noexcept { return 1.0 - uniform(); }

    double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    // Exponential with the given mean (not rate).
    double exponential(double mean) noexcept;

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

}  // namespace hierid
