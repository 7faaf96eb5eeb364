#include "mimosim/corrupt.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mimosim/parallel.hpp"
#include "mimosim/randmat.hpp"

namespace mimo {

namespace {

using std::complex;
const complex<double> kJ(0.0, 1.0);

bool is_unitary(const Eigen::MatrixXcd& v, double tol) {
    if (v.rows() != v.cols()) return false;
    const Eigen::MatrixXcd g = v.adjoint() * v;
    return (g - Eigen::MatrixXcd::Identity(v.rows(), v.cols())).cwiseAbs().maxCoeff() <=
           tol;
}

}  // namespace

DifferenceSpectrum difference_spectrum(const VectorAlphabet& a) {
    const int k = static_cast<int>(a.vectors.size());
    if (k < 2) throw std::invalid_argument("difference_spectrum: need >= 2 vectors");
    DifferenceSpectrum sp;
    sp.n_tx = a.n_tx;
    sp.n_rx = a.n_rx;
    sp.min_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            sp.pairs.emplace_back(i, j);
            sp.diffs.emplace_back(a.vectors[i] - a.vectors[j]);
            const int pair_index = static_cast<int>(sp.pairs.size()) - 1;
            const Eigen::VectorXcd& d = sp.diffs.back();
            const double nrm = d.norm();
            if (nrm < sp.min_norm) {
                sp.min_norm = nrm;
                sp.min_norm_pair = pair_index;
            }
            bool seen = false;
            for (const Eigen::VectorXcd& u : sp.distinct_diffs) {
                if ((u - d).cwiseAbs().maxCoeff() <= 1e-12) {
                    seen = true;
                    break;
                }
            }
            if (!seen) {
                sp.distinct_diffs.push_back(d);
                sp.distinct_rep.push_back(pair_index);
            }
        }
    }
    return sp;
}

CorruptVerdict classify_precoder(const Eigen::MatrixXcd& v, const DifferenceSpectrum& sp,
                                 double gamma, double p, double tol) {
    if (!is_unitary(v, 1e-9))
        throw std::invalid_argument("classify_precoder: matrix is not unitary");
    if (!(gamma > 1.0)) throw std::invalid_argument("classify_precoder: gamma must be > 1");
    if (!(p > 0.0)) throw std::invalid_argument("classify_precoder: p must be positive");
    if (tol < 0.0) throw std::invalid_argument("classify_precoder: tol must be >= 0");
    if (v.rows() != sp.n_tx)
        throw std::invalid_argument("classify_precoder: dimension mismatch");

    const double near = std::pow(gamma, -0.5);
    const double sc3_mag = std::pow(std::log(gamma), -p / 2.0);
    const int n_obs = std::min(sp.n_tx, sp.n_rx);

    CorruptVerdict out;
    Eigen::VectorXcd s(sp.n_tx);
    for (std::size_t j = 0; j < sp.distinct_diffs.size(); ++j) {
        s.noalias() = v * sp.distinct_diffs[j];
        const int rep = sp.distinct_rep[j];

        if (!out.is_bad || !out.in_sc3) {
            for (int i = 0; i < sp.n_tx; ++i) {
                const double mag = std::abs(s(i));
                if (!out.is_bad && mag <= tol) {
                    out.is_bad = true;
                    out.bad = {rep, i};
                }
                if (!out.in_sc3 && i < n_obs && mag <= sc3_mag) {
                    out.in_sc3 = true;
                    out.sc3 = {rep, i};
                }
            }
        }
        if (!out.in_sc1) {
            bool all = true;
            for (int i = 1; i < sp.n_tx; ++i)
                if (std::abs(s(i)) > near) {
                    all = false;
                    break;
                }
            if (all) {
                out.in_sc1 = true;
                out.sc1 = {rep, -1};
            }
        }
        if (!out.in_sc2) {
            bool all = true;
            for (int i = 0; i < n_obs; ++i)
                if (std::abs(s(i)) > near) {
                    all = false;
                    break;
                }
            if (all) {
                out.in_sc2 = true;
                out.sc2 = {rep, -1};
            }
        }
        if (out.is_bad && out.in_sc1 && out.in_sc2 && out.in_sc3) break;
    }
    return out;
}

CorruptVerdict classify_precoder(const Eigen::MatrixXcd& v, const VectorAlphabet& a,
                                 double gamma, double p, double tol) {
    return classify_precoder(v, difference_spectrum(a), gamma, p, tol);
}

namespace {

bool verdict_flag(const CorruptVerdict& vd, CorruptSet set) {
    switch (set) {
        case CorruptSet::sc1: return vd.in_sc1;
        case CorruptSet::sc2: return vd.in_sc2;
        case CorruptSet::sc3: return vd.in_sc3;
    }
    return false;
}

void check_pcp_args(int n_tx, int n_rx, double gamma, const VectorAlphabet& a,
                    const PcpConfig& cfg) {
    if (a.n_tx != n_tx || a.n_rx != n_rx)
        throw std::invalid_argument("estimate_pcp: alphabet does not match dimensions");
    if (!(gamma > 1.0)) throw std::invalid_argument("estimate_pcp: gamma must be > 1");
    if (cfg.n_trials <= 0)
        throw std::invalid_argument("estimate_pcp: n_trials must be positive");
}

void warn_low_hits(long long hits, double gamma) {
    if (hits < 10)
        std::fprintf(stderr,
                     "warning: only %lld corrupt-set hits at gamma=%.3g; "
                     "estimate is unreliable (want >= 10)\n",
                     hits, gamma);
}

}  // namespace

MonteCarloEstimate estimate_pcp(int n_tx, int n_rx, double gamma, CorruptSet set,
                                const VectorAlphabet& a, const PcpConfig& cfg) {
    check_pcp_args(n_tx, n_rx, gamma, a, cfg);
    const DifferenceSpectrum sp = difference_spectrum(a);
    const long long chunk = 2048;
    const std::size_t n_chunks =
        static_cast<std::size_t>((cfg.n_trials + chunk - 1) / chunk);
    std::vector<long long> hits_per_chunk(n_chunks, 0);
    run_chunked(cfg.n_trials, chunk, cfg.workers,
                [&](long long begin, long long end, std::size_t chunk_index) {
                    long long hits = 0;
                    for (long long t = begin; t < end; ++t) {
                        Rng rng(mix_seed(cfg.seed, 0x9C9, static_cast<std::uint64_t>(t)));
                        const Eigen::MatrixXcd v = sample_haar_unitary(n_tx, rng);
                        if (verdict_flag(classify_precoder(v, sp, gamma, cfg.p), set))
                            ++hits;
                    }
                    hits_per_chunk[chunk_index] = hits;
                });
    long long hits = 0;
    for (long long h : hits_per_chunk) hits += h;
    warn_low_hits(hits, gamma);
    return wilson_estimate(hits, cfg.n_trials, cfg.seed);
}

MonteCarloEstimate estimate_pcp_single_pair(int n_tx, int n_rx, double gamma,
                                            CorruptSet set, const VectorAlphabet& a,
                                            const PcpConfig& cfg) {
    check_pcp_args(n_tx, n_rx, gamma, a, cfg);
    const DifferenceSpectrum sp = difference_spectrum(a);
    const double d_norm = sp.min_norm;
    const double near = std::pow(gamma, -0.5);
    const double sc3_mag = std::pow(std::log(gamma), -cfg.p / 2.0);
    const int n_obs = std::min(n_tx, n_rx);

    const long long chunk = 8192;
    const std::size_t n_chunks =
        static_cast<std::size_t>((cfg.n_trials + chunk - 1) / chunk);
    std::vector<long long> hits_per_chunk(n_chunks, 0);
    run_chunked(
        cfg.n_trials, chunk, cfg.workers,
        [&](long long begin, long long end, std::size_t chunk_index) {
            long long hits = 0;
            Eigen::VectorXcd g(n_tx);
            for (long long t = begin; t < end; ++t) {
                Rng rng(mix_seed(cfg.seed, 0x1A17, static_cast<std::uint64_t>(t)));
                for (int i = 0; i < n_tx; ++i) g(i) = rng.cgaussian();
                // s = V d for Haar V has the law of ||d|| times a uniform
                // point on the complex unit sphere.
                const Eigen::VectorXcd s = (d_norm / g.norm()) * g;
                bool hit = false;
                switch (set) {
                    case CorruptSet::sc1: {
                        hit = true;
                        for (int i = 1; i < n_tx; ++i)
                            if (std::abs(s(i)) > near) {
                                hit = false;
                                break;
                            }
                        break;
                    }
                    case CorruptSet::sc2: {
                        hit = true;
                        for (int i = 0; i < n_obs; ++i)
                            if (std::abs(s(i)) > near) {
                                hit = false;
                                break;
                            }
                        break;
                    }
                    case CorruptSet::sc3: {
                        for (int i = 0; i < n_obs; ++i)
                            if (std::abs(s(i)) <= sc3_mag) {
                                hit = true;
                                break;
                            }
                        break;
                    }
                }
                if (hit) ++hits;
            }
            hits_per_chunk[chunk_index] = hits;
        });
    long long hits = 0;
    for (long long h : hits_per_chunk) hits += h;
    warn_low_hits(hits, gamma);
    return wilson_estimate(hits, cfg.n_trials, cfg.seed);
}

double beta_cdf(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_cdf: x outside [0, 1]");
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("beta_cdf: shape parameters must be positive");
    if (a == 1.0) return 1.0 - std::pow(1.0 - x, b);
    if (b == 1.0) return std::pow(x, a);
    return boost::math::ibeta(a, b, x);
}

BetaTailReport beta_tail_check(int n_tx, int n_samples, std::uint64_t seed) {
    if (n_tx < 2) throw std::invalid_argument("beta_tail_check: need n_tx >= 2");
    if (n_samples < 10) throw std::invalid_argument("beta_tail_check: need >= 10 samples");
    std::vector<double> first(n_samples), rest(n_samples);
    Rng rng(seed);
    Eigen::VectorXcd g(n_tx);
    for (int s = 0; s < n_samples; ++s) {
        for (int i = 0; i < n_tx; ++i) g(i) = rng.cgaussian();
        const double total = g.squaredNorm();
        first[s] = std::norm(g(0)) / total;
        rest[s] = 1.0 - first[s];
    }
    const double nb = static_cast<double>(n_tx - 1);
    BetaTailReport rep;
    rep.n_samples = n_samples;
    rep.ks_first = ks_statistic(first, [nb](double x) { return beta_cdf(x, 1.0, nb); });
    rep.ks_rest = ks_statistic(rest, [nb](double x) { return beta_cdf(x, nb, 1.0); });
    const double en = std::sqrt(static_cast<double>(n_samples));
    rep.p_first = kolmogorov_sf((en + 0.12 + 0.11 / en) * rep.ks_first);
    rep.p_rest = kolmogorov_sf((en + 0.12 + 0.11 / en) * rep.ks_rest);
    return rep;
}

Eigen::MatrixXcd bad_precoder_family(int family_id, Rng& rng) {
    const double two_pi = 2.0 * std::numbers::pi;
    const auto phase = [&] { return std::exp(kJ * (rng.uniform() * two_pi)); };
    // Quarter-turn phases e^{j(pi/4 + k pi/2)}: the arguments at which
    // magnitude-sqrt(2) ratios occur among 4-QAM difference components.
    const auto odd_quarter = [&] {
        const int k = static_cast<int>(rng.next_u64() % 4);
        return std::exp(kJ * (std::numbers::pi / 4.0 + k * std::numbers::pi / 2.0));
    };
    Eigen::MatrixXcd v(2, 2);
    switch (family_id) {
        case 1:
            v << 0.0, phase(), phase(), 0.0;
            return v;
        case 2:
            v << phase(), 0.0, 0.0, phase();
            return v;
        case 3: {
            // Unit-magnitude mixing ratio i^k: collides difference pairs whose
            // component ratio is a fourth root of unity.
            const complex<double> c =
                std::pow(kJ, static_cast<int>(rng.next_u64() % 4));
            const double r = 1.0 / std::sqrt(2.0);
            Eigen::MatrixXcd core(2, 2);
            core << r, r * c, r, -r * c;
            v = Eigen::Vector2cd(phase(), phase()).asDiagonal() * core;
            return v;
        }
        case 4: {
            const complex<double> mu = odd_quarter();
            const complex<double> nu = odd_quarter();
            const double r = 1.0 / std::sqrt(3.0);
            Eigen::MatrixXcd core(2, 2);
            core << r, r * std::sqrt(2.0) * mu, r * std::sqrt(2.0) * nu, -r * mu * nu;
            v = Eigen::Vector2cd(phase(), phase()).asDiagonal() * core;
            return v;
        }
        case 5: {
            // Column-swapped variant of family 4: the sqrt(2)-magnitude entry
            // moves to the first column.
            const complex<double> mu = odd_quarter();
            const complex<double> nu = odd_quarter();
            const double r = 1.0 / std::sqrt(3.0);
            Eigen::MatrixXcd core(2, 2);
            core << r * std::sqrt(2.0) * mu, r, -r * mu * nu, r * std::sqrt(2.0) * nu;
            v = Eigen::Vector2cd(phase(), phase()).asDiagonal() * core;
            return v;
        }
        default:
            throw std::invalid_argument("bad_precoder_family: family_id must be 1..5");
    }
}

double bad_precoder_mi_ceiling(int family_id, double gamma_high, const MiConfig& cfg) {
    if (gamma_high < 1e4)
        throw std::invalid_argument("bad_precoder_mi_ceiling: gamma_high must be >= 1e4");
    Rng rng(mix_seed(0xCE11, static_cast<std::uint64_t>(family_id)));
    const Eigen::MatrixXcd v = bad_precoder_family(family_id, rng);
    const VectorAlphabet alph = build_vector_alphabet(build_qam(4), 2, 2);

    double best = std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd b(1, 1);
    b(0, 0) = 1.0;
    for (int row = 0; row < 2; ++row) {
        // Distinct images of the alphabet through this output component,
        // taken equiprobably: the saturated MI is the component's ceiling.
        std::vector<Eigen::VectorXcd> images;
        for (const Eigen::VectorXcd& z : alph.vectors) {
            const complex<double> u = (v.row(row) * z)(0, 0);
            bool seen = false;
            for (const Eigen::VectorXcd& w : images)
                if (std::abs(w(0) - u) <= 1e-9) {
                    seen = true;
                    break;
                }
            if (!seen) {
                Eigen::VectorXcd e(1);
                e(0) = u;
                images.push_back(e);
            }
        }
        CandidateSet cs;
        cs.vectors = images;
        cs.cartesian = false;
        const double mi = mi_candidates(b, cs, gamma_high, cfg);
        best = std::min(best, mi);
    }
    return best;
}

}  // namespace mimo
