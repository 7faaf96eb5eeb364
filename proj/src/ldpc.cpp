#include "mimosim/ldpc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "mimosim/detection.hpp"
#include "mimosim/modulation.hpp"
#include "mimosim/parallel.hpp"
#include "mimosim/randmat.hpp"
#include "mimosim/rng.hpp"

namespace mimo {

namespace {

constexpr double kTanhClip = 0.9999999999999998;

double integral(const std::vector<std::pair<int, double>>& poly) {
    double s = 0.0;
    for (const auto& [d, c] : poly) s += c / d;
    return s;
}

void validate_side(const std::vector<std::pair<int, double>>& poly, const char* name) {
    if (poly.empty()) throw std::invalid_argument(std::string(name) + " is empty");
    double sum = 0.0;
    for (const auto& [d, c] : poly) {
        if (d < 1) throw std::invalid_argument(std::string(name) + ": degree < 1");
        if (c < 0.0) throw std::invalid_argument(std::string(name) + ": negative coefficient");
        sum += c;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(name) + ": coefficients must sum to 1");
}

// Apportion `total` into counts proportional to weights (largest remainder).
std::vector<long long> apportion(long long total, const std::vector<double>& weights) {
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<long long> counts(weights.size());
    std::vector<std::pair<double, std::size_t>> frac;
    long long assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = total * weights[i] / wsum;
        counts[i] = static_cast<long long>(std::floor(exact));
        assigned += counts[i];
        frac.emplace_back(exact - counts[i], i);
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (long long r = total - assigned, i = 0; r > 0; --r, ++i) ++counts[frac[i].second];
    return counts;
}

}  // namespace

void DegreeDistributions::validate() const {
    validate_side(lambda, "lambda");
    validate_side(rho, "rho");
}

double DegreeDistributions::design_rate() const {
    validate();
    return 1.0 - integral(rho) / integral(lambda);
}

DegreeDistributions DegreeDistributions::regular(int d_var, int d_check) {
    if (d_var < 1 || d_check < 1)
        throw std::invalid_argument("regular: degrees must be >= 1");
    DegreeDistributions dd;
    dd.lambda = {{d_var, 1.0}};
    dd.rho = {{d_check, 1.0}};
    return dd;
}

DegreeDistributions DegreeDistributions::irregular_r075() {
    DegreeDistributions dd;
    dd.lambda = {{2, 0.231}, {3, 0.543}, {20, 0.226}};
    dd.rho = {{13, 1.0}};
    return dd;
}

DegreeDistributions DegreeDistributions::irregular_r055() {
    DegreeDistributions dd;
    dd.lambda = {{2, 0.215}, {3, 0.465}, {20, 0.040}, {21, 0.280}};
    dd.rho = {{8, 1.0}};
    return dd;
}

namespace {

struct DegreePlan {
    std::vector<int> var_degree;     // per variable, ascending
    std::vector<int> check_target;   // per check
    long long n_edges = 0;
};

DegreePlan plan_degrees(int n_b, const DegreeDistributions& dd) {
    dd.validate();
    DegreePlan plan;

    std::vector<double> var_w;
    for (const auto& [d, c] : dd.lambda) var_w.push_back(c / d);
    const std::vector<long long> var_counts = apportion(n_b, var_w);
    for (std::size_t i = 0; i < var_counts.size(); ++i) {
        if (var_counts[i] == 0 && dd.lambda[i].second > 0.0)
            throw std::invalid_argument(
                "build_code: n_b too small, variable degree " +
                std::to_string(dd.lambda[i].first) + " rounds to zero nodes");
        for (long long k = 0; k < var_counts[i]; ++k)
            plan.var_degree.push_back(dd.lambda[i].first);
        plan.n_edges += var_counts[i] * dd.lambda[i].first;
    }
    std::sort(plan.var_degree.begin(), plan.var_degree.end());

    const double rho_int = integral(dd.rho);
    const long long n_checks = std::llround(plan.n_edges * rho_int);
    if (n_checks < 1) throw std::invalid_argument("build_code: zero check nodes");
    std::vector<double> check_w;
    for (const auto& [d, c] : dd.rho) check_w.push_back(c / d);
    const std::vector<long long> check_counts = apportion(n_checks, check_w);
    long long capacity = 0;
    for (std::size_t i = 0; i < check_counts.size(); ++i) {
        if (check_counts[i] == 0 && dd.rho[i].second > 0.0)
            throw std::invalid_argument(
                "build_code: n_b too small, check degree " +
                std::to_string(dd.rho[i].first) + " rounds to zero nodes");
        for (long long k = 0; k < check_counts[i]; ++k)
            plan.check_target.push_back(dd.rho[i].first);
        capacity += check_counts[i] * dd.rho[i].first;
    }
    std::sort(plan.check_target.begin(), plan.check_target.end());

    // Degree-sum mismatch from integer rounding: adjust at most one edge per
    // check node, preferring the highest-degree checks for increments and the
    // lowest-degree ones for decrements.
    long long delta = plan.n_edges - capacity;
    if (std::llabs(delta) > n_checks)
        throw std::invalid_argument(
            "build_code: rounding conflict, edge total " +
            std::to_string(plan.n_edges) + " vs check capacity " +
            std::to_string(capacity) + " differs by more than one per check");
    for (std::size_t i = plan.check_target.size(); delta > 0 && i-- > 0; --delta)
        ++plan.check_target[i];
    for (std::size_t i = 0; delta < 0 && i < plan.check_target.size(); ++delta, ++i) {
        if (plan.check_target[i] <= 1)
            throw std::invalid_argument(
                "build_code: rounding conflict, cannot trim degree-1 check");
        --plan.check_target[i];
    }
    return plan;
}

// BFS over the bipartite graph from one variable; fills the minimum edge
// distance to every check (-1 if unreachable).
void bfs_check_depths(int v, const std::vector<std::vector<int>>& var_adj,
                      const std::vector<std::vector<int>>& check_adj,
                      std::vector<int>& check_dist, std::vector<std::uint8_t>& var_seen,
                      std::vector<int>& frontier, std::vector<int>& next_frontier) {
    std::fill(check_dist.begin(), check_dist.end(), -1);
    std::fill(var_seen.begin(), var_seen.end(), 0);
    frontier.clear();
    frontier.push_back(v);
    var_seen[v] = 1;
    int depth = 1;
    while (!frontier.empty()) {
        next_frontier.clear();
        for (int u : frontier)
            for (int c : var_adj[u])
                if (check_dist[c] < 0) {
                    check_dist[c] = depth;
                    next_frontier.push_back(c);
                }
        frontier.clear();
        for (int c : next_frontier)
            for (int u : check_adj[c])
                if (!var_seen[u]) {
                    var_seen[u] = 1;
                    frontier.push_back(u);
                }
        depth += 2;
    }
}

void build_graph_peg(TannerGraph& g, const DegreePlan& plan, std::uint64_t seed) {
    const int n_vars = static_cast<int>(plan.var_degree.size());
    const int n_checks = static_cast<int>(plan.check_target.size());
    g.n_vars = n_vars;
    g.n_checks = n_checks;
    g.var_adj.assign(n_vars, {});
    g.check_adj.assign(n_checks, {});
    std::vector<int> check_degree(n_checks, 0);

    Rng rng(mix_seed(seed, 0x9E6));
    std::vector<int> check_dist(n_checks);
    std::vector<std::uint8_t> var_seen(n_vars);
    std::vector<int> frontier, next_frontier, cand;
    frontier.reserve(n_vars);
    next_frontier.reserve(std::max(n_vars, n_checks));
    std::vector<std::uint8_t> adjacent(n_checks, 0);

    for (int v = 0; v < n_vars; ++v) {
        for (int c : g.var_adj[v]) adjacent[c] = 1;
        for (int e = 0; e < plan.var_degree[v]; ++e) {
            if (e > 0)
                bfs_check_depths(v, g.var_adj, g.check_adj, check_dist, var_seen,
                                 frontier, next_frontier);
            else
                std::fill(check_dist.begin(), check_dist.end(), -1);

            // Candidate checks, best first: unreachable (or deepest in the
            // BFS tree), then least-loaded; capacity caps are soft and only
            // relaxed when every admissible check is full.
            for (int relax_cap = 0; relax_cap < 2; ++relax_cap) {
                cand.clear();
                int best_dist = 0;  // larger is better; -1 (unreachable) best of all
                int best_degree = 0;
                for (int c = 0; c < n_checks; ++c) {
                    if (adjacent[c]) continue;
                    if (!relax_cap && check_degree[c] >= plan.check_target[c]) continue;
                    const int d = check_dist[c] < 0 ? std::numeric_limits<int>::max()
                                                    : check_dist[c];
                    if (!cand.empty()) {
                        if (d < best_dist) continue;
                        if (d > best_dist || check_degree[c] < best_degree) cand.clear();
                        else if (check_degree[c] > best_degree) continue;
                    }
                    if (cand.empty()) {
                        best_dist = d;
                        best_degree = check_degree[c];
                    }
                    cand.push_back(c);
                }
                if (!cand.empty()) break;
            }
            if (cand.empty())
                throw std::invalid_argument(
                    "build_code: variable " + std::to_string(v) +
                    " cannot place edge " + std::to_string(e) +
                    " without a parallel edge");
            const int pick = cand[static_cast<std::size_t>(
                rng.next_u64() % cand.size())];
            g.var_adj[v].push_back(pick);
            g.check_adj[pick].push_back(v);
            ++check_degree[pick];
            adjacent[pick] = 1;
        }
        for (int c : g.var_adj[v]) adjacent[c] = 0;
    }
    for (auto& a : g.var_adj) std::sort(a.begin(), a.end());
    for (auto& a : g.check_adj) std::sort(a.begin(), a.end());
}

void build_encoder(TannerGraph& g) {
    const int n = g.n_vars;
    const int words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> h(g.n_checks,
                                              std::vector<std::uint64_t>(words, 0));
    for (int c = 0; c < g.n_checks; ++c)
        for (int v : g.check_adj[c]) h[c][v >> 6] ^= 1ull << (v & 63);

    const auto get = [&](int row, int col) {
        return (h[row][col >> 6] >> (col & 63)) & 1ull;
    };
    int rank = 0;
    g.parity_cols.clear();
    g.info_cols.clear();
    for (int col = 0; col < n && rank < g.n_checks; ++col) {
        int pivot = -1;
        for (int r = rank; r < g.n_checks; ++r)
            if (get(r, col)) {
                pivot = r;
                break;
            }
        if (pivot < 0) {
            g.info_cols.push_back(col);
            continue;
        }
        std::swap(h[rank], h[pivot]);
        for (int r = 0; r < g.n_checks; ++r)
            if (r != rank && get(r, col))
                for (int w = 0; w < words; ++w) h[r][w] ^= h[rank][w];
        g.parity_cols.push_back(col);
        ++rank;
    }
    for (int col = g.parity_cols.empty() ? 0 : g.parity_cols.back() + 1; col < n; ++col)
        if (std::find(g.info_cols.begin(), g.info_cols.end(), col) == g.info_cols.end() &&
            std::find(g.parity_cols.begin(), g.parity_cols.end(), col) ==
                g.parity_cols.end())
            g.info_cols.push_back(col);
    g.k_info = static_cast<int>(g.info_cols.size());

    const int kwords = (g.k_info + 63) / 64;
    g.enc_rows.assign(g.parity_cols.size(), std::vector<std::uint64_t>(kwords, 0));
    for (std::size_t r = 0; r < g.parity_cols.size(); ++r)
        for (int j = 0; j < g.k_info; ++j)
            if (get(static_cast<int>(r), g.info_cols[j]))
                g.enc_rows[r][j >> 6] ^= 1ull << (j & 63);
}

}  // namespace

TannerGraph build_code(int n_b, const DegreeDistributions& dd, std::uint64_t seed,
                       const std::string& method) {
    if (method != "peg")
        throw std::invalid_argument("build_code: unknown method '" + method + "'");
    if (n_b < 2) throw std::invalid_argument("build_code: n_b must be >= 2");
    const DegreePlan plan = plan_degrees(n_b, dd);
    TannerGraph g;
    build_graph_peg(g, plan, seed);
    build_encoder(g);
    return g;
}

std::vector<std::uint8_t> encode(const TannerGraph& g, std::span<const std::uint8_t> info) {
    if (static_cast<int>(info.size()) != g.k_info)
        throw std::invalid_argument("encode: expected " + std::to_string(g.k_info) +
                                    " info bits, got " + std::to_string(info.size()));
    const int kwords = (g.k_info + 63) / 64;
    std::vector<std::uint64_t> packed(kwords, 0);
    for (int j = 0; j < g.k_info; ++j)
        if (info[j] & 1) packed[j >> 6] ^= 1ull << (j & 63);

    std::vector<std::uint8_t> word(g.n_vars, 0);
    for (int j = 0; j < g.k_info; ++j) word[g.info_cols[j]] = info[j] & 1;
    for (std::size_t r = 0; r < g.parity_cols.size(); ++r) {
        std::uint64_t acc = 0;
        for (int w = 0; w < kwords; ++w)
            acc ^= g.enc_rows[r][w] & packed[w];
        word[g.parity_cols[r]] =
            static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return word;
}

bool check_syndrome(const TannerGraph& g, std::span<const std::uint8_t> word) {
    if (static_cast<int>(word.size()) != g.n_vars)
        throw std::invalid_argument("check_syndrome: word length mismatch");
    for (int c = 0; c < g.n_checks; ++c) {
        int parity = 0;
        for (int v : g.check_adj[c]) parity ^= word[v] & 1;
        if (parity) return false;
    }
    return true;
}

void write_alist(const TannerGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_alist: cannot open " + path);
    int dv = 0;
    int dc = 0;
    for (const auto& a : g.var_adj) dv = std::max(dv, static_cast<int>(a.size()));
    for (const auto& a : g.check_adj) dc = std::max(dc, static_cast<int>(a.size()));
    out << g.n_vars << ' ' << g.n_checks << '\n' << dv << ' ' << dc << '\n';
    for (int v = 0; v < g.n_vars; ++v)
        out << g.var_adj[v].size() << (v + 1 < g.n_vars ? ' ' : '\n');
    for (int c = 0; c < g.n_checks; ++c)
        out << g.check_adj[c].size() << (c + 1 < g.n_checks ? ' ' : '\n');
    for (const auto& a : g.var_adj) {
        for (int i = 0; i < dv; ++i)
            out << (i < static_cast<int>(a.size()) ? a[i] + 1 : 0)
                << (i + 1 < dv ? ' ' : '\n');
    }
    for (const auto& a : g.check_adj) {
        for (int i = 0; i < dc; ++i)
            out << (i < static_cast<int>(a.size()) ? a[i] + 1 : 0)
                << (i + 1 < dc ? ' ' : '\n');
    }
    if (!out) throw std::runtime_error("write_alist: write failed for " + path);
}

SumProductDecoder::SumProductDecoder(const TannerGraph& g) : g_(&g) {
    check_offset_.assign(g.n_checks + 1, 0);
    for (int c = 0; c < g.n_checks; ++c)
        check_offset_[c + 1] =
            check_offset_[c] + static_cast<int>(g.check_adj[c].size());
    edge_var_.resize(check_offset_.back());
    var_edges_.assign(g.n_vars, {});
    for (int c = 0; c < g.n_checks; ++c) {
        int e = check_offset_[c];
        for (int v : g.check_adj[c]) {
            edge_var_[e] = v;
            var_edges_[v].push_back(e);
            ++e;
        }
    }
    r_.assign(edge_var_.size(), 0.0);
    mu_ch_.assign(g.n_vars, 0.0);
    total_.assign(g.n_vars, 0.0);
}

void SumProductDecoder::reset() {
    std::fill(r_.begin(), r_.end(), 0.0);
    std::fill(mu_ch_.begin(), mu_ch_.end(), 0.0);
    std::fill(total_.begin(), total_.end(), 0.0);
    iters_done_ = 0;
}

void SumProductDecoder::set_channel_llrs(std::span<const double> llrs) {
    if (static_cast<int>(llrs.size()) != g_->n_vars)
        throw std::invalid_argument("set_channel_llrs: length mismatch");
    for (int v = 0; v < g_->n_vars; ++v) mu_ch_[v] = -llrs[v];
    refresh_totals();
}

void SumProductDecoder::refresh_totals() {
    for (int v = 0; v < g_->n_vars; ++v) {
        double t = mu_ch_[v];
        for (int e : var_edges_[v]) t += r_[e];
        total_[v] = t;
    }
}

bool SumProductDecoder::syndrome_ok() const {
    for (int c = 0; c < g_->n_checks; ++c) {
        int parity = 0;
        for (int e = check_offset_[c]; e < check_offset_[c + 1]; ++e)
            parity ^= total_[edge_var_[e]] < 0.0;
        if (parity) return false;
    }
    return true;
}

bool SumProductDecoder::run(int iters) {
    thread_local std::vector<double> t_fwd, t_bwd, tanh_q;
    for (int it = 0; it < iters; ++it) {
        for (int c = 0; c < g_->n_checks; ++c) {
            const int begin = check_offset_[c];
            const int end = check_offset_[c + 1];
            const int deg = end - begin;
            tanh_q.resize(deg);
            t_fwd.resize(deg + 1);
            t_bwd.resize(deg + 1);
            for (int i = 0; i < deg; ++i) {
                const int e = begin + i;
                const double q = total_[edge_var_[e]] - r_[e];
                tanh_q[i] = std::tanh(0.5 * q);
            }
            t_fwd[0] = 1.0;
            t_bwd[deg] = 1.0;
            for (int i = 0; i < deg; ++i) t_fwd[i + 1] = t_fwd[i] * tanh_q[i];
            for (int i = deg; i-- > 0;) t_bwd[i] = t_bwd[i + 1] * tanh_q[i];
            for (int i = 0; i < deg; ++i) {
                const double prod =
                    std::clamp(t_fwd[i] * t_bwd[i + 1], -kTanhClip, kTanhClip);
                r_[begin + i] = 2.0 * std::atanh(prod);
            }
        }
        refresh_totals();
        ++iters_done_;
        if (syndrome_ok()) return true;
    }
    return syndrome_ok();
}

std::vector<double> SumProductDecoder::posterior_llrs() const {
    std::vector<double> out(g_->n_vars);
    for (int v = 0; v < g_->n_vars; ++v) out[v] = -total_[v];
    return out;
}

std::vector<std::uint8_t> SumProductDecoder::hard_bits() const {
    std::vector<std::uint8_t> out(g_->n_vars);
    for (int v = 0; v < g_->n_vars; ++v) out[v] = total_[v] < 0.0 ? 1 : 0;
    return out;
}

DecodeResult decode_sum_product(const TannerGraph& g, std::span<const double> llrs,
                                int max_iters) {
    SumProductDecoder dec(g);
    dec.set_channel_llrs(llrs);
    DecodeResult res;
    res.converged = dec.run(max_iters);
    res.iterations = dec.iterations_done();
    res.bits = dec.hard_bits();
    return res;
}

namespace {

std::vector<int> seeded_permutation(int n, std::uint64_t seed) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

}  // namespace

MonteCarloEstimate coded_wer(const CodedChainConfig& cfg, double gamma) {
    if (cfg.code == nullptr) throw std::invalid_argument("coded_wer: missing code");
    if (cfg.n_words <= 0) throw std::invalid_argument("coded_wer: n_words must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("coded_wer: gamma must be positive");
    if (cfg.total_iters < cfg.iters_per_detection || cfg.iters_per_detection < 1)
        throw std::invalid_argument("coded_wer: bad iteration budget");
    const bool is_stc = cfg.schedule == ScheduleKind::stc;
    if (!is_stc && cfg.schedule != ScheduleKind::identity &&
        cfg.schedule != ScheduleKind::fixed_random &&
        cfg.schedule != ScheduleKind::segment_haar)
        throw std::invalid_argument("coded_wer: unsupported schedule kind");

    const Constellation con = build_qam(cfg.m_order);
    const VectorAlphabet alph = build_vector_alphabet(con, cfg.n_tx, cfg.n_rx);
    const CandidateSet cands = is_stc ? candidate_set_stc(cfg.stc_id, con)
                                      : candidate_set_from_alphabet(alph);
    const int bpu = cands.bits;  // coded bits per detection unit
    const int n_b = cfg.code->n_vars;
    if (n_b % bpu != 0)
        throw std::invalid_argument("coded_wer: block length " + std::to_string(n_b) +
                                    " is not a multiple of " + std::to_string(bpu) +
                                    " bits per detection unit");
    const int n_units = n_b / bpu;
    const int uses_per_unit = is_stc ? stc_block_length(cfg.stc_id) : 1;
    const int n_uses = n_units * uses_per_unit;
    const int n_streams = std::min(cfg.n_tx, cfg.n_rx);
    const int k_cands = static_cast<int>(cands.vectors.size());
    const int rounds = cfg.total_iters / cfg.iters_per_detection;
    const double sat = cfg.llr_saturation;
    const double sqrtg = std::sqrt(gamma);

    const std::vector<int> perm = seeded_permutation(n_b, mix_seed(cfg.seed, 0x17EA));

    const long long chunk = 32;
    const std::size_t n_chunks =
        static_cast<std::size_t>((cfg.n_words + chunk - 1) / chunk);
    std::vector<long long> hits_per_chunk(n_chunks, 0);

    run_chunked(cfg.n_words, chunk, cfg.workers, [&](long long begin, long long end,
                                                     std::size_t chunk_index) {
        SumProductDecoder dec(*cfg.code);
        std::vector<std::uint8_t> info(cfg.code->k_info);
        std::vector<double> priors(n_b), det_ext(n_b), chan_llrs(n_b);
        DetectionProblem prob;
        prob.cands = &cands;
        long long hits = 0;

        for (long long wd = begin; wd < end; ++wd) {
            const std::uint64_t ts = mix_seed(cfg.seed, 0xC0DE, static_cast<std::uint64_t>(wd));
            Rng bit_rng(mix_seed(ts, 1));
            for (auto& b : info) b = static_cast<std::uint8_t>(bit_rng.next_u64() & 1);
            const std::vector<std::uint8_t> word = encode(*cfg.code, info);

            Rng ch_rng(mix_seed(ts, 2));
            const ChannelRealization ch = sample_channel(cfg.n_tx, cfg.n_rx, ch_rng);
            const EffectiveChannel eff = reduce_channel(ch);
            const Eigen::MatrixXcd b_base =
                eff.sigma.asDiagonal() *
                Eigen::MatrixXcd(ch.v.adjoint()).topRows(n_streams);

            // Effective matrix for each detection unit (or one shared matrix).
            std::vector<Eigen::MatrixXcd> unit_h;
            std::vector<int> unit_of_use(n_uses, 0);
            if (is_stc) {
                Eigen::MatrixXcd h_blk = Eigen::MatrixXcd::Zero(
                    n_streams * uses_per_unit, cfg.n_tx * uses_per_unit);
                for (int t = 0; t < uses_per_unit; ++t)
                    h_blk.block(t * n_streams, t * cfg.n_tx, n_streams, cfg.n_tx) =
                        sqrtg * b_base;
                unit_h.push_back(std::move(h_blk));
            } else {
                PrecoderSchedule sched = make_schedule(
                    cfg.schedule, cfg.n_tx, n_uses, cfg.n_segments,
                    cfg.schedule == ScheduleKind::fixed_random
                        ? mix_seed(cfg.seed, 0xF17ED)
                        : mix_seed(ts, 4));
                const int n_mats =
                    static_cast<int>(std::max<std::size_t>(sched.mats.size(), 1));
                unit_h.reserve(n_mats);
                for (int k = 0; k < n_mats; ++k) {
                    const Eigen::MatrixXcd p = sched.mats.empty()
                                                   ? Eigen::MatrixXcd::Identity(
                                                         cfg.n_tx, cfg.n_tx)
                                                   : sched.mats[k];
                    unit_h.emplace_back(sqrtg * b_base * p);
                }
                for (int t = 0; t < n_uses; ++t)
                    unit_of_use[t] = sched.mats.empty() ? 0 : sched.segment_of(t);
            }

            // Map interleaved code bits to candidate labels and pass each unit
            // through the channel.
            Rng noise_rng(mix_seed(ts, 3));
            std::vector<int> labels(n_units);
            std::vector<Eigen::VectorXcd> received(n_units);
            for (int u = 0; u < n_units; ++u) {
                int label = 0;
                for (int j = 0; j < bpu; ++j)
                    label = (label << 1) | (word[perm[u * bpu + j]] & 1);
                labels[u] = label;
                const Eigen::MatrixXcd& h =
                    is_stc ? unit_h[0] : unit_h[unit_of_use[u]];
                Eigen::VectorXcd y = h * cands.vectors[label];
                for (int i = 0; i < y.size(); ++i) y(i) += noise_rng.cgaussian();
                received[u] = std::move(y);
            }

            std::fill(priors.begin(), priors.end(), 0.0);
            dec.reset();
            bool converged = false;
            for (int round = 0; round < rounds && !converged; ++round) {
                for (int u = 0; u < n_units; ++u) {
                    prob.y = received[u];
                    prob.h_eff = is_stc ? unit_h[0] : unit_h[unit_of_use[u]];
                    prob.priors = priors.data() + static_cast<std::size_t>(u) * bpu;
                    const CandidateList list = sphere_list(
                        prob, cfg.detector_capacity > 0 ? cfg.detector_capacity
                                                        : k_cands);
                    const std::vector<double> llr = soft_llr(prob, list, sat);
                    for (int j = 0; j < bpu; ++j)
                        det_ext[u * bpu + j] =
                            std::clamp(llr[j] - priors[u * bpu + j], -sat, sat);
                }
                for (int i = 0; i < n_b; ++i) chan_llrs[perm[i]] = det_ext[i];
                dec.set_channel_llrs(chan_llrs);
                converged = dec.run(cfg.iters_per_detection);
                if (!converged && round + 1 < rounds) {
                    const std::vector<double> post = dec.posterior_llrs();
                    for (int v = 0; v < n_b; ++v)
                        det_ext[v] = std::clamp(post[v] - chan_llrs[v], -sat, sat);
                    for (int i = 0; i < n_b; ++i) priors[i] = det_ext[perm[i]];
                }
            }
            const std::vector<std::uint8_t> decided = dec.hard_bits();
            bool err = false;
            for (int j = 0; j < cfg.code->k_info; ++j)
                if (decided[cfg.code->info_cols[j]] != info[j]) {
                    err = true;
                    break;
                }
            if (err) ++hits;
        }
        hits_per_chunk[chunk_index] = hits;
    });
    long long hits = 0;
    for (long long h : hits_per_chunk) hits += h;
    return wilson_estimate(hits, cfg.n_words, cfg.seed);
}

}  // namespace mimo
