#pragma once
// Classification of unitary precoders whose difference spectra lose stream
// separation (exact zeros or SNR-dependent near-zeros), the probability
// scaling of those events under Haar draws, and the saturated mutual
// information of the structurally degenerate 2x2 families.
#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "mimosim/information.hpp"
#include "mimosim/modulation.hpp"
#include "mimosim/rng.hpp"
#include "mimosim/stats.hpp"

namespace mimo {

struct DifferenceSpectrum {
    int n_tx = 0;
    int n_rx = 0;
    std::vector<std::pair<int, int>> pairs;        // all ordered label pairs (a, b), a != b
    std::vector<Eigen::VectorXcd> diffs;           // z_a - z_b, indexed like pairs
    std::vector<Eigen::VectorXcd> distinct_diffs;  // deduplicated difference values
    std::vector<int> distinct_rep;                 // a pair index realizing each distinct diff
    double min_norm = 0.0;                         // smallest ||z_a - z_b||
    int min_norm_pair = -1;
};

DifferenceSpectrum difference_spectrum(const VectorAlphabet& a);

struct CorruptWitness {
    int pair = -1;       // index into DifferenceSpectrum::pairs
    int component = -1;  // offending component where a single one matters
};

struct CorruptVerdict {
    bool is_bad = false;   // some difference component is (numerically) zero
    bool in_sc1 = false;   // some pair has all components beyond the first below gamma^-1/2
    bool in_sc2 = false;   // some pair has components 1..n_rx below gamma^-1/2
    bool in_sc3 = false;   // some pair/component i <= min(n_tx, n_rx) with |s_i|^2 <= (ln gamma)^-p
    CorruptWitness bad, sc1, sc2, sc3;
};

// Exhaustive scan of the difference spectrum of v (which must be unitary,
// checked to 1e-9) against the thresholds described on CorruptVerdict.
CorruptVerdict classify_precoder(const Eigen::MatrixXcd& v, const DifferenceSpectrum& sp,
                                 double gamma, double p = 2.0, double tol = 1e-9);
CorruptVerdict classify_precoder(const Eigen::MatrixXcd& v, const VectorAlphabet& a,
                                 double gamma, double p = 2.0, double tol = 1e-9);

enum class CorruptSet { sc1, sc2, sc3 };

struct PcpConfig {
    long long n_trials = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    double p = 2.0;  // sc3 threshold exponent
};

// Fraction of Haar-drawn precoders classified into the chosen set. Emits a
// warning when fewer than 10 hits were observed.
MonteCarloEstimate estimate_pcp(int n_tx, int n_rx, double gamma, CorruptSet set,
                                const VectorAlphabet& a, const PcpConfig& cfg);

// Probability that the single minimum-norm difference pair satisfies the set
// predicate, using the spherically uniform statistic v = V d / ||d|| (sampled
// directly as a normalized complex Gaussian). Brackets the set probability:
// single-pair <= set <= pair_count * single-pair.
MonteCarloEstimate estimate_pcp_single_pair(int n_tx, int n_rx, double gamma,
                                            CorruptSet set, const VectorAlphabet& a,
                                            const PcpConfig& cfg);

// Regularized Beta CDF with exact closed forms for shape (1, b) and (a, 1).
double beta_cdf(double x, double a, double b);

struct BetaTailReport {
    double ks_first = 0.0;  // KS distance of |v_1|^2 against Beta(1, n-1)
    double p_first = 0.0;
    double ks_rest = 0.0;   // KS distance of sum_{i>=2} |v_i|^2 against Beta(n-1, 1)
    double p_rest = 0.0;
    int n_samples = 0;
};

// Empirical check that unit-sphere component energies follow the closed-form
// Beta laws used by the probability bounds above.
BetaTailReport beta_tail_check(int n_tx, int n_samples = 20000,
                               std::uint64_t seed = 0xBE7A);

// A random member of one of the five degenerate 2x2 unitary families
// (1: antidiagonal phases, 2: diagonal phases, 3: balanced-magnitude mixing,
// 4: 1:sqrt(2) magnitude mixing, 5: the magnitude-swapped variant of 4).
// Free phases are drawn from rng; every member is unitary and classified bad.
Eigen::MatrixXcd bad_precoder_family(int family_id, Rng& rng);

// High-SNR mutual information ceiling of a family representative: the
// smallest per-receive-component MI over equiprobable distinct component
// images of the 2x2 4-QAM alphabet, evaluated at gamma_high >= 1e4.
double bad_precoder_mi_ceiling(int family_id, double gamma_high, const MiConfig& cfg);

}  // namespace mimo
