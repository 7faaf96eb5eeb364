#pragma once
// Real-valued two-channel system: rotated BPSK over two Rayleigh gains with
// N(0, 0.5) noise per real dimension. Small enough to study rotation-angle
// diversity effects in isolation from the complex MIMO machinery.
#include <cstdint>

#include "mimosim/information.hpp"
#include "mimosim/stats.hpp"

namespace mimo {

struct ToyChannel {
    double beta1 = 1.0;  // nonnegative real gains, E[beta^2] = 1 under fading
    double beta2 = 1.0;
    double theta = 0.0;  // rotation angle, [0, 2*pi)
    double gamma = 1.0;  // SNR
};

// I(z; y) in bits for y_i = sqrt(gamma) * beta_i * (Q(theta) z)_i + w_i,
// z uniform over {+-1/sqrt(2)}^2, w_i ~ N(0, 0.5). Range [0, 2].
// cfg.sphere_capacity is ignored (the alphabet has four points).
double toy_mutual_information(const ToyChannel& ch, const MiConfig& cfg);

// Smallest nonzero |component| over all rotated BPSK difference vectors
// Q(theta) * (z_a - z_b), z_a != z_b.
double toy_min_difference_component(double theta);

enum class ToyThetaMode { fixed, random_uniform };

struct ToyOutageConfig {
    ToyThetaMode mode = ToyThetaMode::fixed;
    double theta = 0.0;    // used by fixed mode
    double r_c = 0.9;      // code rate in (0, 1]; outage threshold is 2 * r_c
    long long n_trials = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    MiConfig mi;
};

// Pr(MI < 2 * r_c) over draws of (beta1, beta2) and, in random_uniform mode,
// theta ~ U[0, 2*pi).
MonteCarloEstimate toy_outage(const ToyOutageConfig& cfg, double gamma);

}  // namespace mimo
