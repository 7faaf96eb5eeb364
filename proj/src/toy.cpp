#include "mimosim/toy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mimosim/parallel.hpp"
#include "mimosim/rng.hpp"

namespace mimo {

namespace {

constexpr double kInvLn2 = 1.4426950408889634074;
constexpr double kHalfSqrt2 = 0.70710678118654752440;  // 1/sqrt(2)

void check_channel(const ToyChannel& ch) {
    if (ch.beta1 < 0.0 || ch.beta2 < 0.0)
        throw std::invalid_argument("toy: gains must be nonnegative");
    if (ch.theta < 0.0 || ch.theta >= 2.0 * std::numbers::pi)
        throw std::invalid_argument("toy: theta must lie in [0, 2*pi)");
    if (!(ch.gamma > 0.0)) throw std::invalid_argument("toy: gamma must be positive");
}

// Images sqrt(gamma) * diag(beta) * Q(theta) * z for the four BPSK vectors,
// label bit 0 selecting +1/sqrt(2) on each component (component 0 = MSB).
void toy_images(const ToyChannel& ch, double t1[4], double t2[4]) {
    const double c = std::cos(ch.theta);
    const double s = std::sin(ch.theta);
    const double g = std::sqrt(ch.gamma);
    for (int a = 0; a < 4; ++a) {
        const double z1 = (a & 2) ? -kHalfSqrt2 : kHalfSqrt2;
        const double z2 = (a & 1) ? -kHalfSqrt2 : kHalfSqrt2;
        t1[a] = g * ch.beta1 * (c * z1 - s * z2);
        t2[a] = g * ch.beta2 * (s * z1 + c * z2);
    }
}

}  // namespace

double toy_mutual_information(const ToyChannel& ch, const MiConfig& cfg) {
    check_channel(ch);
    if (cfg.noise_samples < 2 || cfg.noise_samples % 2 != 0)
        throw std::invalid_argument("toy: noise_samples must be even and >= 2");
    double t1[4];
    double t2[4];
    toy_images(ch, t1, t2);

    const int half = cfg.noise_samples / 2;
    // Noise has variance 0.5 per component, so likelihood exponents are
    // -(|y - t_b|^2) / (2 * 0.5) = -q_ab -+ 2 <d_ab, w>, the same shape as the
    // unit-variance complex kernel but over two real dimensions.
    std::vector<double> w1(half), w2(half);
    Rng rng(cfg.seed);
    const double noise_std = std::sqrt(0.5);
    for (int s = 0; s < half; ++s) {
        w1[s] = noise_std * rng.gaussian();
        w2[s] = noise_std * rng.gaussian();
    }

    double accum = 0.0;
    double q[4];
    double cr[4];
    double e[4];
    for (int a = 0; a < 4; ++a) {
        double d1[4];
        double d2[4];
        for (int j = 0; j < 4; ++j) {
            d1[j] = t1[a] - t1[j];
            d2[j] = t2[a] - t2[j];
            q[j] = d1[j] * d1[j] + d2[j] * d2[j];
        }
        for (int s = 0; s < half; ++s) {
            for (int j = 0; j < 4; ++j) cr[j] = d1[j] * w1[s] + d2[j] * w2[s];
            for (int sign = 0; sign < 2; ++sign) {
                const double flip = sign == 0 ? 1.0 : -1.0;
                double m = 0.0;
                for (int j = 0; j < 4; ++j) {
                    e[j] = -q[j] - 2.0 * flip * cr[j];
                    m = std::max(m, e[j]);
                }
                double sum = 0.0;
                for (int j = 0; j < 4; ++j) sum += std::exp(std::max(e[j] - m, -700.0));
                accum += (m + std::log(sum)) * kInvLn2;
            }
        }
    }
    return 2.0 - accum / (4.0 * cfg.noise_samples);
}

double toy_min_difference_component(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double step = 2.0 * kHalfSqrt2;  // difference per flipped component
    double best = std::numeric_limits<double>::infinity();
    for (int u1 = -1; u1 <= 1; ++u1) {
        for (int u2 = -1; u2 <= 1; ++u2) {
            if (u1 == 0 && u2 == 0) continue;
            const double d1 = step * u1;
            const double d2 = step * u2;
            const double s1 = std::abs(c * d1 - s * d2);
            const double s2 = std::abs(s * d1 + c * d2);
            best = std::min({best, s1, s2});
        }
    }
    return best;
}

MonteCarloEstimate toy_outage(const ToyOutageConfig& cfg, double gamma) {
    if (cfg.n_trials <= 0)
        throw std::invalid_argument("toy_outage: n_trials must be positive");
    if (!(cfg.r_c > 0.0 && cfg.r_c <= 1.0))
        throw std::invalid_argument("toy_outage: r_c must lie in (0, 1]");
    const double threshold = 2.0 * cfg.r_c;
    const long long chunk = 4096;
    const std::size_t n_chunks =
        static_cast<std::size_t>((cfg.n_trials + chunk - 1) / chunk);
    std::vector<long long> hits_per_chunk(n_chunks, 0);
    run_chunked(cfg.n_trials, chunk, cfg.workers,
                [&](long long begin, long long end, std::size_t chunk_index) {
                    long long hits = 0;
                    for (long long t = begin; t < end; ++t) {
                        const std::uint64_t trial_seed =
                            mix_seed(cfg.seed, 0x707, static_cast<std::uint64_t>(t));
                        Rng rng(mix_seed(trial_seed, 1));
                        ToyChannel ch;
                        ch.beta1 = std::sqrt(rng.rayleigh_sq());
                        ch.beta2 = std::sqrt(rng.rayleigh_sq());
                        ch.theta = cfg.mode == ToyThetaMode::fixed
                                       ? cfg.theta
                                       : rng.uniform() * 2.0 * std::numbers::pi;
                        ch.gamma = gamma;
                        MiConfig mi = cfg.mi;
                        mi.seed = mix_seed(trial_seed, 3);
                        if (toy_mutual_information(ch, mi) < threshold) ++hits;
                    }
                    hits_per_chunk[chunk_index] = hits;
                });
    long long hits = 0;
    for (long long h : hits_per_chunk) hits += h;
    return wilson_estimate(hits, cfg.n_trials, cfg.seed);
}

}  // namespace mimo
