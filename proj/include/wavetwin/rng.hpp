#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace wavetwin {

// Deterministic random streams. std::mt19937 + std::normal_distribution would
// work, but the distribution algorithms are implementation-defined; results
// must be reproducible bit-for-bit from a seed, so both the generator
// (xoshiro256++) and the transforms (Box-Muller) are spelled out here.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    std::uint64_t next_u64() {
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

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Derives an independent child seed from a root seed and a tag path, e.g.
/// derive_seed(root, "member", 17) or derive_seed(root, "obs", cycle).
/// Same inputs always give the same child; distinct tags give unrelated
/// streams without the caller tracking draw order across subsystems.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t s = root ^ 0xa0761d6478bd642fULL;
    for (const char c : tag) {
        s ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        (void)splitmix64(s);
    }
    s ^= index;
    (void)splitmix64(s);
    return splitmix64(s);
}

} // namespace wavetwin
