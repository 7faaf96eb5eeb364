#include "mimosim/information.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "mimosim/parallel.hpp"
#include "mimosim/precoding.hpp"
#include "mimosim/rng.hpp"

namespace mimo {

namespace {

constexpr double kInvLn2 = 1.4426950408889634074;

// Scratch buffers reused across calls to keep the inner loops allocation-free.
struct Workspace {
    std::vector<double> tre, tim;    // candidate images, component-major [i*k + a]
    std::vector<double> dre, dim;    // differences against the outer candidate
    std::vector<double> q;           // squared norms of the differences
    std::vector<double> cross;       // Re<d, w> per inner candidate
    std::vector<double> e;           // exponents fed to log-sum-exp
    std::vector<double> wre, wim;    // noise draws, component-major [i*half + s]
};
thread_local Workspace g_ws;

// log2(sum_j exp(e_j)) with the max subtracted first. The entry for the outer
// candidate itself is always present and nonnegative, so the max is >= 0.
double lse_log2(const double* e, int k) {
    double m = e[0];
    for (int j = 1; j < k; ++j) m = std::max(m, e[j]);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
        const double x = std::max(e[j] - m, -700.0);
        sum += std::exp(x);
    }
    return (m + std::log(sum)) * kInvLn2;
}

void draw_noise(Workspace& ws, int r, int half, std::uint64_t seed) {
    ws.wre.resize(static_cast<std::size_t>(r) * half);
    ws.wim.resize(static_cast<std::size_t>(r) * half);
    Rng rng(seed);
    for (int s = 0; s < half; ++s) {
        for (int i = 0; i < r; ++i) {
            const std::complex<double> w = rng.cgaussian();
            ws.wre[static_cast<std::size_t>(i) * half + s] = w.real();
            ws.wim[static_cast<std::size_t>(i) * half + s] = w.imag();
        }
    }
}

void fill_images(Workspace& ws, const Eigen::MatrixXcd& b, double sqrtg,
                 std::span<const Eigen::VectorXcd> cands) {
    const int r = static_cast<int>(b.rows());
    const int k = static_cast<int>(cands.size());
    ws.tre.resize(static_cast<std::size_t>(r) * k);
    ws.tim.resize(static_cast<std::size_t>(r) * k);
    for (int a = 0; a < k; ++a) {
        const Eigen::VectorXcd t = sqrtg * (b * cands[a]);
        for (int i = 0; i < r; ++i) {
            ws.tre[static_cast<std::size_t>(i) * k + a] = t(i).real();
            ws.tim[static_cast<std::size_t>(i) * k + a] = t(i).imag();
        }
    }
}

// Exact kernel: for every outer candidate a and noise draw w (both antithetic
// signs), accumulate log2 sum_b exp(-|d_ab|^2 -+ 2 Re<d_ab, w>).
double mi_exhaustive(const Eigen::MatrixXcd& b, std::span<const Eigen::VectorXcd> cands,
                     double gamma, const MiConfig& cfg) {
    Workspace& ws = g_ws;
    const int r = static_cast<int>(b.rows());
    const int k = static_cast<int>(cands.size());
    const int half = cfg.noise_samples / 2;
    fill_images(ws, b, std::sqrt(gamma), cands);
    draw_noise(ws, r, half, cfg.seed);
    ws.dre.resize(static_cast<std::size_t>(r) * k);
    ws.dim.resize(static_cast<std::size_t>(r) * k);
    ws.q.assign(k, 0.0);
    ws.cross.assign(k, 0.0);
    ws.e.assign(k, 0.0);

    double accum = 0.0;
    for (int a = 0; a < k; ++a) {
        std::fill(ws.q.begin(), ws.q.end(), 0.0);
        for (int i = 0; i < r; ++i) {
            const std::size_t row = static_cast<std::size_t>(i) * k;
            const double ta_re = ws.tre[row + a];
            const double ta_im = ws.tim[row + a];
            double* dr = ws.dre.data() + row;
            double* di = ws.dim.data() + row;
            const double* tr = ws.tre.data() + row;
            const double* ti = ws.tim.data() + row;
            for (int j = 0; j < k; ++j) {
                dr[j] = ta_re - tr[j];
                di[j] = ta_im - ti[j];
                ws.q[j] += dr[j] * dr[j] + di[j] * di[j];
            }
        }
        for (int s = 0; s < half; ++s) {
            std::fill(ws.cross.begin(), ws.cross.end(), 0.0);
            for (int i = 0; i < r; ++i) {
                const std::size_t row = static_cast<std::size_t>(i) * k;
                const double wr = ws.wre[static_cast<std::size_t>(i) * half + s];
                const double wi = ws.wim[static_cast<std::size_t>(i) * half + s];
                const double* dr = ws.dre.data() + row;
                const double* di = ws.dim.data() + row;
                for (int j = 0; j < k; ++j) ws.cross[j] += dr[j] * wr + di[j] * wi;
            }
            for (int j = 0; j < k; ++j) ws.e[j] = -ws.q[j] - 2.0 * ws.cross[j];
            accum += lse_log2(ws.e.data(), k);
            for (int j = 0; j < k; ++j) ws.e[j] += 4.0 * ws.cross[j];
            accum += lse_log2(ws.e.data(), k);
        }
    }
    const double denom = static_cast<double>(k) * cfg.noise_samples;
    return std::log2(static_cast<double>(k)) - accum / denom;
}

// Sphere-assisted kernel: the inner sum keeps only the sphere_capacity
// candidates closest to the received point, which upper-bounds the dropped
// tail by zero and so never lowers the estimate.
double mi_sphere(const Eigen::MatrixXcd& b, const CandidateSet& cands, double gamma,
                 const MiConfig& cfg) {
    const int r = static_cast<int>(b.rows());
    const int k = static_cast<int>(cands.vectors.size());
    const int half = cfg.noise_samples / 2;
    const double sqrtg = std::sqrt(gamma);

    DetectionProblem prob;
    prob.h_eff = sqrtg * b;
    prob.cands = &cands;

    std::vector<Eigen::VectorXcd> images(k);
    for (int a = 0; a < k; ++a) images[a] = prob.h_eff * cands.vectors[a];

    Rng rng(cfg.seed);
    std::vector<Eigen::VectorXcd> noise(half, Eigen::VectorXcd(r));
    for (int s = 0; s < half; ++s)
        for (int i = 0; i < r; ++i) noise[s](i) = rng.cgaussian();

    double accum = 0.0;
    for (int a = 0; a < k; ++a) {
        for (int s = 0; s < half; ++s) {
            const double w2 = noise[s].squaredNorm();
            for (int sign = 0; sign < 2; ++sign) {
                prob.y = sign == 0 ? Eigen::VectorXcd(images[a] + noise[s])
                                   : Eigen::VectorXcd(images[a] - noise[s]);
                const CandidateList list = sphere_list(prob, cfg.sphere_capacity);
                // exponents are w2 - metric_b; the list is metric-ascending so
                // the first entry carries the max.
                const double max_e = w2 - list.entries.front().metric;
                double sum = 0.0;
                for (const auto& ent : list.entries) {
                    const double x = std::max(w2 - ent.metric - max_e, -700.0);
                    sum += std::exp(x);
                }
                accum += (max_e + std::log(sum)) * kInvLn2;
            }
        }
    }
    const double denom = static_cast<double>(k) * cfg.noise_samples;
    return std::log2(static_cast<double>(k)) - accum / denom;
}

void check_mi_args(std::size_t n_cands, const MiConfig& cfg, double gamma) {
    if (n_cands == 0) throw std::invalid_argument("mi: empty candidate set");
    if (!(gamma > 0.0)) throw std::invalid_argument("mi: gamma must be positive");
    if (cfg.noise_samples < 2 || cfg.noise_samples % 2 != 0)
        throw std::invalid_argument("mi: noise_samples must be even and >= 2");
}

}  // namespace

double mi_candidates(const Eigen::MatrixXcd& b, const CandidateSet& cands, double gamma,
                     const MiConfig& cfg) {
    check_mi_args(cands.vectors.size(), cfg, gamma);
    if (b.cols() != cands.vectors.front().size())
        throw std::invalid_argument("mi: channel/candidate dimension mismatch");
    if (cfg.sphere_capacity > 0 &&
        cfg.sphere_capacity < static_cast<int>(cands.vectors.size()))
        return mi_sphere(b, cands, gamma, cfg);
    return mi_exhaustive(b, cands.vectors, gamma, cfg);
}

double mutual_information(const Eigen::VectorXd& sigma, const Eigen::MatrixXcd& v_t,
                          const VectorAlphabet& a, double gamma, const MiConfig& cfg) {
    check_mi_args(a.vectors.size(), cfg, gamma);
    const int r = static_cast<int>(sigma.size());
    if (v_t.rows() < r || v_t.cols() != a.n_tx)
        throw std::invalid_argument("mutual_information: shape mismatch");
    const Eigen::MatrixXcd b = sigma.asDiagonal() * v_t.topRows(r);
    if (cfg.sphere_capacity > 0 && cfg.sphere_capacity < static_cast<int>(a.vectors.size())) {
        const CandidateSet cs = candidate_set_from_alphabet(a);
        return mi_sphere(b, cs, gamma, cfg);
    }
    return mi_exhaustive(b, a.vectors, gamma, cfg);
}

double emi_mean_mi(const Eigen::VectorXd& sigma, const VectorAlphabet& a, double gamma,
                   int n_precoders, const MiConfig& cfg) {
    if (n_precoders <= 0)
        throw std::invalid_argument("emi_mean_mi: n_precoders must be positive");
    double total = 0.0;
    for (int p = 0; p < n_precoders; ++p) {
        Rng rng(mix_seed(cfg.seed, 0xE31, static_cast<std::uint64_t>(p)));
        const Eigen::MatrixXcd v_t = sample_haar_unitary(a.n_tx, rng);
        MiConfig per = cfg;
        per.seed = mix_seed(cfg.seed, 0x4015, static_cast<std::uint64_t>(p));
        total += mutual_information(sigma, v_t, a, gamma, per);
    }
    return total / n_precoders;
}

namespace {

// MI of one channel draw under the given scheme, in bits per channel use.
// stc_cands is the prebuilt block candidate set (used by SchemeKind::stc only).
double scheme_mi(const OutageScheme& scheme, const OutageConfig& cfg, double gamma,
                 const VectorAlphabet& alph, const CandidateSet* stc_cands,
                 const ChannelRealization& ch, std::uint64_t trial_seed) {
    const EffectiveChannel eff = reduce_channel(ch);
    MiConfig mi = cfg.mi;
    mi.seed = mix_seed(trial_seed, 3);
    switch (scheme.kind) {
        case SchemeKind::none:
            return mutual_information(eff.sigma, Eigen::MatrixXcd(ch.v.adjoint()), alph,
                                      gamma, mi);
        case SchemeKind::fixed: {
            Rng rng(mix_seed(cfg.seed, 0xF17ED));  // one precoder shared by all trials
            const Eigen::MatrixXcd p = sample_haar_unitary(cfg.n_tx, rng);
            return mutual_information(eff.sigma, Eigen::MatrixXcd(ch.v.adjoint() * p),
                                      alph, gamma, mi);
        }
        case SchemeKind::emi: {
            double total = 0.0;
            for (int k = 0; k < scheme.n_precoders; ++k) {
                Rng rng(mix_seed(trial_seed, 2, static_cast<std::uint64_t>(k)));
                const Eigen::MatrixXcd p = sample_haar_unitary(cfg.n_tx, rng);
                MiConfig per = mi;
                per.seed = mix_seed(trial_seed, 3, static_cast<std::uint64_t>(k));
                total += mutual_information(eff.sigma, Eigen::MatrixXcd(ch.v.adjoint() * p),
                                            alph, gamma, per);
            }
            return total / scheme.n_precoders;
        }
        case SchemeKind::emi_n: {
            double total = 0.0;
            for (int k = 0; k < scheme.n_segments; ++k) {
                Rng rng(mix_seed(trial_seed, 2, static_cast<std::uint64_t>(k)));
                const Eigen::MatrixXcd p = sample_haar_unitary(cfg.n_tx, rng);
                MiConfig per = mi;
                per.seed = mix_seed(trial_seed, 3, static_cast<std::uint64_t>(k));
                total += mutual_information(eff.sigma, Eigen::MatrixXcd(ch.v.adjoint() * p),
                                            alph, gamma, per);
            }
            return total / scheme.n_segments;
        }
        case SchemeKind::stc: {
            const int k_uses = stc_block_length(scheme.stc_id);
            const Eigen::MatrixXcd b = eff.sigma.asDiagonal() *
                                       Eigen::MatrixXcd(ch.v.adjoint()).topRows(eff.n_streams);
            Eigen::MatrixXcd b_blk =
                Eigen::MatrixXcd::Zero(b.rows() * k_uses, b.cols() * k_uses);
            for (int t = 0; t < k_uses; ++t)
                b_blk.block(t * b.rows(), t * b.cols(), b.rows(), b.cols()) = b;
            return mi_candidates(b_blk, *stc_cands, gamma, mi) / k_uses;
        }
    }
    throw std::logic_error("scheme_mi: unreachable");
}

}  // namespace

MonteCarloEstimate outage_probability(const OutageScheme& scheme, const OutageConfig& cfg,
                                      double gamma) {
    if (cfg.n_trials <= 0)
        throw std::invalid_argument("outage_probability: n_trials must be positive");
    if (!(cfg.rate_bpcu > 0.0))
        throw std::invalid_argument("outage_probability: rate must be positive");
    const Constellation con = build_qam(cfg.m_order);
    const double max_rate = static_cast<double>(con.bits) *
                            std::min(cfg.n_tx, cfg.n_rx);
    if (cfg.rate_bpcu > max_rate + 1e-12) {
        std::fprintf(stderr,
                     "warning: target rate %.6g exceeds the alphabet maximum %.6g; "
                     "outage is 1 by construction\n",
                     cfg.rate_bpcu, max_rate);
        return wilson_estimate(cfg.n_trials, cfg.n_trials, cfg.seed);
    }
    const VectorAlphabet alph = build_vector_alphabet(con, cfg.n_tx, cfg.n_rx);
    CandidateSet stc_cands;
    if (scheme.kind == SchemeKind::stc)
        stc_cands = candidate_set_stc(scheme.stc_id, con);

    const long long chunk = 1024;
    const std::size_t n_chunks =
        static_cast<std::size_t>((cfg.n_trials + chunk - 1) / chunk);
    std::vector<long long> hits_per_chunk(n_chunks, 0);
    run_chunked(cfg.n_trials, chunk, cfg.workers,
                [&](long long begin, long long end, std::size_t chunk_index) {
                    long long hits = 0;
                    for (long long t = begin; t < end; ++t) {
                        const std::uint64_t trial_seed =
                            mix_seed(cfg.seed, 0x07A6E, static_cast<std::uint64_t>(t));
                        Rng ch_rng(mix_seed(trial_seed, 1));
                        const ChannelRealization ch =
                            sample_channel(cfg.n_tx, cfg.n_rx, ch_rng);
                        const double mi = scheme_mi(scheme, cfg, gamma, alph,
                                                    &stc_cands, ch, trial_seed);
                        if (mi < cfg.rate_bpcu) ++hits;
                    }
                    hits_per_chunk[chunk_index] = hits;
                });
    long long hits = 0;
    for (long long h : hits_per_chunk) hits += h;
    return wilson_estimate(hits, cfg.n_trials, cfg.seed);
}

double diversity_slope(std::span<const double> gammas,
                       std::span<const MonteCarloEstimate> p_out) {
    if (gammas.size() != p_out.size())
        throw std::invalid_argument("diversity_slope: length mismatch");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (p_out[i].value <= 0.0 || p_out[i].ci_low <= 0.0) continue;
        x.push_back(std::log10(gammas[i]));
        y.push_back(-std::log10(p_out[i].value));
    }
    if (x.size() < 2)
        throw std::invalid_argument(
            "diversity_slope: fewer than two points with nonzero estimates");
    return ls_slope(x, y);
}

}  // namespace mimo
