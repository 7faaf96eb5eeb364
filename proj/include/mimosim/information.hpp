#pragma once
// Monte Carlo mutual information of discrete-input quasi-static channels and
// the outage probabilities built from it.
#include <Eigen/Dense>

#include <span>
#include <string>

#include "mimosim/detection.hpp"
#include "mimosim/modulation.hpp"
#include "mimosim/randmat.hpp"
#include "mimosim/stats.hpp"

namespace mimo {

struct MiConfig {
    int noise_samples = 64;    // even; drawn as antithetic pairs
    std::uint64_t seed = 0x5eed;
    int sphere_capacity = 0;   // > 0: truncate inner sums to that many closest
                               // candidates (0 = exact exhaustive sums)
};

// I(x; y) in bits for y = sqrt(gamma) * B * x + w, w ~ CN(0, I), x uniform
// over the candidate vectors. Exact inner sums unless cfg.sphere_capacity > 0.
double mi_candidates(const Eigen::MatrixXcd& b, const CandidateSet& cands, double gamma,
                     const MiConfig& cfg);

// Per-channel-use MI of the diagonalized system with combined right factor
// v_t: y = sqrt(gamma) * diag(sigma) * rows(v_t) * x + w. sigma holds the
// received stream gains (min(n_tx, n_rx) of them).
double mutual_information(const Eigen::VectorXd& sigma, const Eigen::MatrixXcd& v_t,
                          const VectorAlphabet& a, double gamma, const MiConfig& cfg);

// Mean MI over n_precoders independent Haar-drawn combined factors.
double emi_mean_mi(const Eigen::VectorXd& sigma, const VectorAlphabet& a, double gamma,
                   int n_precoders, const MiConfig& cfg);

enum class SchemeKind { none, fixed, emi, emi_n, stc };

struct OutageScheme {
    SchemeKind kind = SchemeKind::none;
    int n_segments = 1;     // emi_n: precoders per codeword
    int n_precoders = 100;  // emi: precoders averaged per channel
    std::string stc_id;     // stc: "alamouti" | "golden"
};

struct OutageConfig {
    int n_tx = 2;
    int n_rx = 2;
    int m_order = 4;
    double rate_bpcu = 0.0;  // R, bits per channel use
    long long n_trials = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    MiConfig mi;
};

// Pr(scheme MI < R) over channel draws, with a Wilson 95% interval.
MonteCarloEstimate outage_probability(const OutageScheme& scheme, const OutageConfig& cfg,
                                      double gamma);

// Least-squares slope of -log10(P) against log10(gamma). Points whose CI
// touches zero are dropped; at least two must survive.
double diversity_slope(std::span<const double> gammas,
                       std::span<const MonteCarloEstimate> p_out);

}  // namespace mimo
