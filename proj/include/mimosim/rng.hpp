#pragma once
// Seeded random streams. Every Monte Carlo trial owns a stream derived from
// (master seed, point index, trial index), so results never depend on how
// trials are scheduled across workers.
#include <cstdint>
#include <cmath>
#include <complex>

namespace mimo {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministically combine a seed with a stream label.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (label + 0x632be59bd9b4e019ull));
    return splitmix64(s);
}
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    return mix_seed(mix_seed(mix_seed(seed, a), b), c);
}

// xoshiro256++ with splitmix64 seeding.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : s_) s = splitmix64(x);
    }

    std::uint64_t next_u64() {
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

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // (0, 1]
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // N(0, 1), Box-Muller; second value of each pair is cached.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(phi);
        have_cached_ = true;
        return r * std::cos(phi);
    }

    // CN(0, 1): variance 1/2 per real part.
    std::complex<double> cgaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return {re * 0.7071067811865475244, im * 0.7071067811865475244};
    }

    // beta^2 where beta is Rayleigh with E[beta^2] = 1: Pr(beta^2 > t) = exp(-t).
    double rayleigh_sq() { return -std::log(uniform_pos()); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace mimo
