#include "mimosim/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "mimosim/corrupt.hpp"
#include "mimosim/information.hpp"
#include "mimosim/ldpc.hpp"
#include "mimosim/modulation.hpp"
#include "mimosim/randmat.hpp"
#include "mimosim/rng.hpp"
#include "mimosim/toy.hpp"

namespace mimo {

using nlohmann::json;

double convert_snr(double eb_n0_db, double rate, int n_tx, int n_rx) {
    if (!(rate > 0.0)) throw ConfigError("convert_snr: rate must be positive");
    if (n_tx < 1 || n_rx < 1) throw ConfigError("convert_snr: antenna counts must be >= 1");
    return rate * std::pow(10.0, eb_n0_db / 10.0) / (n_tx * n_rx);
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment",   "n_tx",          "n_rx",
        "modulation",   "scheme",        "n_segments",
        "n_precoders",  "rate",          "theta_mode",
        "theta",        "r_c",           "corrupt_set",
        "p_exponent",   "single_pair",   "n_b",
        "code",         "detector_capacity", "total_iters",
        "iters_per_detection", "v_mode", "snr_grid_db",
        "gamma_grid",   "n_trials",      "seed",
        "workers",      "noise_samples", "sphere_capacity",
        "output"};
    return keys;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

void check_grid(const std::vector<double>& grid, const char* name) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError(std::string("config field '") + name +
                              "': grid must be strictly increasing");
}

bool one_of(const std::string& v, std::initializer_list<const char*> opts) {
    for (const char* o : opts)
        if (v == o) return true;
    return false;
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known_keys().contains(key))
            throw ConfigError("unknown config field '" + key + "'");

    ExperimentConfig c;
    read_field(j, "experiment", c.experiment);
    read_field(j, "n_tx", c.n_tx);
    read_field(j, "n_rx", c.n_rx);
    read_field(j, "modulation", c.modulation);
    read_field(j, "scheme", c.scheme);
    read_field(j, "n_segments", c.n_segments);
    read_field(j, "n_precoders", c.n_precoders);
    read_field(j, "rate", c.rate);
    read_field(j, "theta_mode", c.theta_mode);
    read_field(j, "theta", c.theta);
    read_field(j, "r_c", c.r_c);
    read_field(j, "corrupt_set", c.corrupt_set);
    read_field(j, "p_exponent", c.p_exponent);
    read_field(j, "single_pair", c.single_pair);
    read_field(j, "n_b", c.n_b);
    read_field(j, "code", c.code);
    read_field(j, "detector_capacity", c.detector_capacity);
    read_field(j, "total_iters", c.total_iters);
    read_field(j, "iters_per_detection", c.iters_per_detection);
    read_field(j, "v_mode", c.v_mode);
    read_field(j, "snr_grid_db", c.snr_grid_db);
    read_field(j, "gamma_grid", c.gamma_grid);
    read_field(j, "n_trials", c.n_trials);
    read_field(j, "seed", c.seed);
    read_field(j, "workers", c.workers);
    read_field(j, "noise_samples", c.noise_samples);
    read_field(j, "sphere_capacity", c.sphere_capacity);
    read_field(j, "output", c.output);
    validate_config(c);
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["n_tx"] = c.n_tx;
    j["n_rx"] = c.n_rx;
    j["modulation"] = c.modulation;
    j["scheme"] = c.scheme;
    j["n_segments"] = c.n_segments;
    j["n_precoders"] = c.n_precoders;
    j["rate"] = c.rate;
    j["theta_mode"] = c.theta_mode;
    j["theta"] = c.theta;
    j["r_c"] = c.r_c;
    j["corrupt_set"] = c.corrupt_set;
    j["p_exponent"] = c.p_exponent;
    j["single_pair"] = c.single_pair;
    j["n_b"] = c.n_b;
    j["code"] = c.code;
    j["detector_capacity"] = c.detector_capacity;
    j["total_iters"] = c.total_iters;
    j["iters_per_detection"] = c.iters_per_detection;
    j["v_mode"] = c.v_mode;
    j["snr_grid_db"] = c.snr_grid_db;
    j["gamma_grid"] = c.gamma_grid;
    j["n_trials"] = c.n_trials;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["noise_samples"] = c.noise_samples;
    j["sphere_capacity"] = c.sphere_capacity;
    j["output"] = c.output;
    return j.dump(2);
}

void validate_config(const ExperimentConfig& c) {
    if (!one_of(c.experiment, {"outage", "wer", "pcp", "toy", "haar_test", "mi_probe"}))
        throw ConfigError("config field 'experiment': unknown experiment '" +
                          c.experiment + "'");
    if (c.n_tx < 1 || c.n_rx < 1)
        throw ConfigError("config fields 'n_tx'/'n_rx': must be >= 1");
    if (c.modulation != 2 && c.modulation != 4 && c.modulation != 16 && c.modulation != 64)
        throw ConfigError("config field 'modulation': must be one of 2, 4, 16, 64");
    if (c.workers < 1) throw ConfigError("config field 'workers': must be >= 1");
    if (c.noise_samples < 2 || c.noise_samples % 2 != 0)
        throw ConfigError("config field 'noise_samples': must be even and >= 2");
    if (c.sphere_capacity < 0)
        throw ConfigError("config field 'sphere_capacity': must be >= 0");
    if (c.output.empty()) throw ConfigError("config field 'output': must be non-empty");
    check_grid(c.snr_grid_db, "snr_grid_db");
    check_grid(c.gamma_grid, "gamma_grid");
    for (double g : c.gamma_grid)
        if (!(g > 0.0))
            throw ConfigError("config field 'gamma_grid': values must be positive");

    const bool has_snr = !c.snr_grid_db.empty();
    const bool has_gamma = !c.gamma_grid.empty();
    const bool needs_grid = c.experiment != "haar_test";
    if (needs_grid) {
        if (has_snr == has_gamma)
            throw ConfigError(
                "config: exactly one of 'snr_grid_db' and 'gamma_grid' must be given");
    }
    const bool needs_trials = c.experiment != "mi_probe";
    if (needs_trials && c.n_trials <= 0)
        throw ConfigError("config field 'n_trials': must be positive");

    if (c.experiment == "outage") {
        if (!one_of(c.scheme, {"none", "fixed", "emi", "emi_n", "golden", "alamouti"}))
            throw ConfigError("config field 'scheme': unknown scheme '" + c.scheme + "'");
        if (!(c.rate > 0.0)) throw ConfigError("config field 'rate': must be positive");
        if (c.scheme == "emi_n" && c.n_segments < 1)
            throw ConfigError("config field 'n_segments': must be >= 1");
        if (c.scheme == "emi" && c.n_precoders < 1)
            throw ConfigError("config field 'n_precoders': must be >= 1");
    } else if (c.experiment == "wer") {
        if (!one_of(c.scheme, {"none", "fixed", "emi_n", "golden", "alamouti"}))
            throw ConfigError("config field 'scheme': unknown coded scheme '" + c.scheme +
                              "'");
        if (!one_of(c.code, {"regular-3-30", "irregular-r075", "irregular-r055"}))
            throw ConfigError("config field 'code': unknown code '" + c.code + "'");
        if (c.n_b < 2) throw ConfigError("config field 'n_b': must be >= 2");
        if (c.iters_per_detection < 1 || c.total_iters < c.iters_per_detection)
            throw ConfigError(
                "config fields 'total_iters'/'iters_per_detection': need "
                "total_iters >= iters_per_detection >= 1");
        if (c.detector_capacity < 0)
            throw ConfigError("config field 'detector_capacity': must be >= 0");
    } else if (c.experiment == "pcp") {
        if (!one_of(c.corrupt_set, {"sc1", "sc2", "sc3"}))
            throw ConfigError("config field 'corrupt_set': must be sc1, sc2 or sc3");
        if (!(c.p_exponent > 0.0))
            throw ConfigError("config field 'p_exponent': must be positive");
        if (!has_gamma)
            throw ConfigError("config: pcp requires 'gamma_grid' (linear SNR values)");
        for (double g : c.gamma_grid)
            if (!(g > 1.0))
                throw ConfigError("config field 'gamma_grid': pcp needs gamma > 1");
    } else if (c.experiment == "toy") {
        if (!one_of(c.theta_mode, {"fixed", "random_uniform"}))
            throw ConfigError("config field 'theta_mode': must be fixed or random_uniform");
        if (!(c.r_c > 0.0 && c.r_c <= 1.0))
            throw ConfigError("config field 'r_c': must lie in (0, 1]");
    } else if (c.experiment == "mi_probe") {
        if (!one_of(c.v_mode, {"identity", "haar"}))
            throw ConfigError("config field 'v_mode': must be identity or haar");
        if (!has_gamma)
            throw ConfigError("config: mi_probe requires 'gamma_grid'");
    }
}

namespace {

std::vector<std::pair<double, double>> resolve_grid(const ExperimentConfig& c,
                                                    double rate_for_conversion) {
    std::vector<std::pair<double, double>> axis;  // (csv snr column, gamma)
    if (!c.snr_grid_db.empty()) {
        for (double db : c.snr_grid_db)
            axis.emplace_back(db, convert_snr(db, rate_for_conversion, c.n_tx, c.n_rx));
    } else {
        for (double g : c.gamma_grid) axis.emplace_back(10.0 * std::log10(g), g);
    }
    return axis;
}

OutageScheme scheme_from_config(const ExperimentConfig& c) {
    OutageScheme s;
    if (c.scheme == "none") s.kind = SchemeKind::none;
    else if (c.scheme == "fixed") s.kind = SchemeKind::fixed;
    else if (c.scheme == "emi") s.kind = SchemeKind::emi;
    else if (c.scheme == "emi_n") s.kind = SchemeKind::emi_n;
    else {
        s.kind = SchemeKind::stc;
        s.stc_id = c.scheme;
    }
    s.n_segments = c.n_segments;
    s.n_precoders = c.n_precoders;
    return s;
}

DegreeDistributions code_from_name(const std::string& name) {
    if (name == "regular-3-30") return DegreeDistributions::regular(3, 30);
    if (name == "irregular-r075") return DegreeDistributions::irregular_r075();
    return DegreeDistributions::irregular_r055();
}

RunResult run_outage(const ExperimentConfig& c) {
    const OutageScheme scheme = scheme_from_config(c);
    OutageConfig oc;
    oc.n_tx = c.n_tx;
    oc.n_rx = c.n_rx;
    oc.m_order = c.modulation;
    oc.rate_bpcu = c.rate;
    oc.n_trials = c.n_trials;
    oc.workers = c.workers;
    oc.mi.noise_samples = c.noise_samples;
    oc.mi.sphere_capacity = c.sphere_capacity;
    RunResult out;
    const auto axis = resolve_grid(c, c.rate);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        RunPoint pt;
        pt.snr_db = axis[i].first;
        pt.gamma = axis[i].second;
        oc.seed = mix_seed(c.seed, 0xA0, static_cast<std::uint64_t>(i));
        const auto t0 = std::chrono::steady_clock::now();
        pt.est = outage_probability(scheme, oc, pt.gamma);
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                         .count();
        out.points.push_back(pt);
    }
    out.extra_json = "{}";
    return out;
}

RunResult run_wer(const ExperimentConfig& c) {
    const DegreeDistributions dd = code_from_name(c.code);
    const TannerGraph code = build_code(c.n_b, dd, mix_seed(c.seed, 0x10DC));

    CodedChainConfig wc;
    wc.n_tx = c.n_tx;
    wc.n_rx = c.n_rx;
    wc.m_order = c.modulation;
    if (c.scheme == "none") wc.schedule = ScheduleKind::identity;
    else if (c.scheme == "fixed") wc.schedule = ScheduleKind::fixed_random;
    else if (c.scheme == "emi_n") wc.schedule = ScheduleKind::segment_haar;
    else {
        wc.schedule = ScheduleKind::stc;
        wc.stc_id = c.scheme;
    }
    wc.n_segments = c.n_segments;
    wc.code = &code;
    wc.n_words = c.n_trials;
    wc.workers = c.workers;
    wc.detector_capacity = c.detector_capacity;
    wc.total_iters = c.total_iters;
    wc.iters_per_detection = c.iters_per_detection;

    // True information rate of the chain, used for the Eb/N0 conversion.
    const Constellation con = build_qam(c.modulation);
    const bool is_stc = wc.schedule == ScheduleKind::stc;
    const CandidateSet cands =
        is_stc ? candidate_set_stc(wc.stc_id, con)
               : candidate_set_from_alphabet(
                     build_vector_alphabet(con, c.n_tx, c.n_rx));
    if (code.n_vars % cands.bits != 0)
        throw ConfigError("config: n_b must be a multiple of " +
                          std::to_string(cands.bits) + " coded bits per detection unit");
    const long long n_uses = static_cast<long long>(code.n_vars / cands.bits) *
                             (is_stc ? stc_block_length(wc.stc_id) : 1);
    const double rate = static_cast<double>(code.k_info) / static_cast<double>(n_uses);

    RunResult out;
    const auto axis = resolve_grid(c, rate);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        RunPoint pt;
        pt.snr_db = axis[i].first;
        pt.gamma = axis[i].second;
        wc.seed = mix_seed(c.seed, 0xA1, static_cast<std::uint64_t>(i));
        const auto t0 = std::chrono::steady_clock::now();
        pt.est = coded_wer(wc, pt.gamma);
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                         .count();
        out.points.push_back(pt);
    }
    json extra;
    extra["code_rate"] = rate;
    extra["k_info"] = code.k_info;
    extra["n_checks"] = code.n_checks;
    out.extra_json = extra.dump();
    return out;
}

RunResult run_pcp(const ExperimentConfig& c) {
    const VectorAlphabet alph =
        build_vector_alphabet(build_qam(c.modulation), c.n_tx, c.n_rx);
    const CorruptSet set = c.corrupt_set == "sc1"   ? CorruptSet::sc1
                           : c.corrupt_set == "sc2" ? CorruptSet::sc2
                                                    : CorruptSet::sc3;
    PcpConfig pc;
    pc.n_trials = c.n_trials;
    pc.workers = c.workers;
    pc.p = c.p_exponent;
    RunResult out;
    const auto axis = resolve_grid(c, 1.0);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        RunPoint pt;
        pt.snr_db = axis[i].first;
        pt.gamma = axis[i].second;
        pc.seed = mix_seed(c.seed, 0xA2, static_cast<std::uint64_t>(i));
        const auto t0 = std::chrono::steady_clock::now();
        pt.est = c.single_pair
                     ? estimate_pcp_single_pair(c.n_tx, c.n_rx, pt.gamma, set, alph, pc)
                     : estimate_pcp(c.n_tx, c.n_rx, pt.gamma, set, alph, pc);
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                         .count();
        out.points.push_back(pt);
    }
    out.extra_json = "{}";
    return out;
}

RunResult run_toy(const ExperimentConfig& c) {
    ToyOutageConfig tc;
    tc.mode = c.theta_mode == "fixed" ? ToyThetaMode::fixed : ToyThetaMode::random_uniform;
    tc.theta = c.theta;
    tc.r_c = c.r_c;
    tc.n_trials = c.n_trials;
    tc.workers = c.workers;
    tc.mi.noise_samples = c.noise_samples;
    RunResult out;
    const auto axis = resolve_grid(c, 2.0 * c.r_c);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        RunPoint pt;
        pt.snr_db = axis[i].first;
        pt.gamma = axis[i].second;
        tc.seed = mix_seed(c.seed, 0xA3, static_cast<std::uint64_t>(i));
        const auto t0 = std::chrono::steady_clock::now();
        pt.est = toy_outage(tc, pt.gamma);
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                         .count();
        out.points.push_back(pt);
    }
    out.extra_json = "{}";
    return out;
}

RunResult run_haar_test(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n_samples = static_cast<int>(std::min<long long>(c.n_trials, 10000000));
    const BetaTailReport rep = beta_tail_check(c.n_tx, n_samples, mix_seed(c.seed, 0xA4));

    // Left-invariance: the first-entry energy of V and of U*V (fixed unitary
    // U) must share one distribution.
    const int n_two = static_cast<int>(std::min<long long>(c.n_trials, 20000));
    Rng u_rng(mix_seed(c.seed, 0xA5));
    const Eigen::MatrixXcd u = sample_haar_unitary(c.n_tx, u_rng);
    std::vector<double> plain(n_two), rotated(n_two);
    for (int s = 0; s < n_two; ++s) {
        Rng rng(mix_seed(c.seed, 0xA6, static_cast<std::uint64_t>(s)));
        const Eigen::MatrixXcd v = sample_haar_unitary(c.n_tx, rng);
        plain[s] = std::norm(v(0, 0));
        rotated[s] = std::norm((u * v)(0, 0));
    }
    const double p_two = ks_two_sample_pvalue(plain, rotated);

    RunResult out;
    RunPoint pt;
    pt.snr_db = 0.0;
    pt.gamma = static_cast<double>(c.n_tx);
    pt.est.value = rep.ks_first;
    pt.est.ci_low = rep.ks_first;
    pt.est.ci_high = rep.ks_first;
    pt.est.n_trials = n_samples;
    pt.est.seed = c.seed;
    pt.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.points.push_back(pt);

    json extra;
    extra["ks_first"] = rep.ks_first;
    extra["p_first"] = rep.p_first;
    extra["ks_rest"] = rep.ks_rest;
    extra["p_rest"] = rep.p_rest;
    extra["left_invariance_p"] = p_two;
    out.extra_json = extra.dump();
    return out;
}

RunResult run_mi_probe(const ExperimentConfig& c) {
    const VectorAlphabet alph =
        build_vector_alphabet(build_qam(c.modulation), c.n_tx, c.n_rx);
    const int n_streams = std::min(c.n_tx, c.n_rx);
    Eigen::MatrixXcd v_t = Eigen::MatrixXcd::Identity(c.n_tx, c.n_tx);
    Eigen::VectorXd sigma = Eigen::VectorXd::Ones(n_streams);
    if (c.v_mode == "haar") {
        Rng rng(mix_seed(c.seed, 0xA7));
        const ChannelRealization ch = sample_channel(c.n_tx, c.n_rx, rng);
        sigma = ch.sigma;
        v_t = ch.v.adjoint();
    }
    MiConfig mc;
    mc.noise_samples = c.noise_samples;
    mc.sphere_capacity = c.sphere_capacity;
    RunResult out;
    const auto axis = resolve_grid(c, 1.0);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        RunPoint pt;
        pt.snr_db = axis[i].first;
        pt.gamma = axis[i].second;
        mc.seed = mix_seed(c.seed, 0xA8, static_cast<std::uint64_t>(i));
        const auto t0 = std::chrono::steady_clock::now();
        const double mi = mutual_information(sigma, v_t, alph, pt.gamma, mc);
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                         .count();
        pt.est.value = mi;
        pt.est.ci_low = mi;
        pt.est.ci_high = mi;
        pt.est.n_trials = c.noise_samples;
        pt.est.seed = c.seed;
        out.points.push_back(pt);
    }
    out.extra_json = "{}";
    return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c) {
    validate_config(c);
    if (c.experiment == "outage") return run_outage(c);
    if (c.experiment == "wer") return run_wer(c);
    if (c.experiment == "pcp") return run_pcp(c);
    if (c.experiment == "toy") return run_toy(c);
    if (c.experiment == "haar_test") return run_haar_test(c);
    return run_mi_probe(c);
}

std::string manifest_path_for(const std::string& output) {
    return output + ".manifest.json";
}

void write_results(const ExperimentConfig& cfg, const RunResult& result) {
    std::ofstream csv(cfg.output);
    if (!csv) throw std::runtime_error("cannot open output file " + cfg.output);
    csv << "snr_eb_n0_db,gamma,estimate,ci_low,ci_high,n_trials,seconds\n";
    char line[512];
    for (const RunPoint& pt : result.points) {
        std::snprintf(line, sizeof(line), "%.10g,%.10g,%.17g,%.17g,%.17g,%lld,%.3f\n",
                      pt.snr_db, pt.gamma, pt.est.value, pt.est.ci_low, pt.est.ci_high,
                      pt.est.n_trials, pt.seconds);
        csv << line;
    }
    if (!csv) throw std::runtime_error("write failed for " + cfg.output);
    csv.close();

    json manifest;
    manifest["format_version"] = 1;
    manifest["config"] = json::parse(config_to_json(cfg));
    manifest["extra"] = json::parse(result.extra_json);
    std::ofstream mf(manifest_path_for(cfg.output));
    if (!mf) throw std::runtime_error("cannot open manifest for " + cfg.output);
    mf << manifest.dump(2) << '\n';
    if (!mf) throw std::runtime_error("manifest write failed for " + cfg.output);
}

}  // namespace mimo
