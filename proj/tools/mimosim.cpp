// Command-line front end: one subcommand per experiment, flags mirroring the
// configuration fields, or a single JSON config file. Exit codes: 0 success,
// 2 configuration error, 3 runtime/numeric error.
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mimosim/harness.hpp"

namespace {

struct SubCommand {
    CLI::App* app = nullptr;
    std::string experiment;  // config-field spelling (snake_case)
};

void add_common_options(CLI::App* sub, mimo::ExperimentConfig& c, std::string& config_path) {
    sub->add_option("--config", config_path,
                    "JSON config file; cannot be combined with other flags");
    sub->add_option("--n-tx", c.n_tx, "transmit antennas");
    sub->add_option("--n-rx", c.n_rx, "receive antennas");
    sub->add_option("--modulation", c.modulation, "QAM order (2, 4, 16, 64)");
    sub->add_option("--scheme", c.scheme,
                    "precoding scheme: none|fixed|emi|emi_n|golden|alamouti");
    sub->add_option("--n-segments", c.n_segments, "precoder segments per codeword (emi_n)");
    sub->add_option("--n-precoders", c.n_precoders, "precoders averaged per channel (emi)");
    sub->add_option("--rate", c.rate, "target rate in bits per channel use");
    sub->add_option("--theta-mode", c.theta_mode, "toy rotation: fixed|random_uniform");
    sub->add_option("--theta", c.theta, "toy rotation angle in radians");
    sub->add_option("--r-c", c.r_c, "toy code rate in (0, 1]");
    sub->add_option("--corrupt-set", c.corrupt_set, "precoder event set: sc1|sc2|sc3");
    sub->add_option("--p-exponent", c.p_exponent, "sc3 threshold exponent p");
    sub->add_flag("--single-pair", c.single_pair,
                  "classify only the minimum-distance difference pair");
    sub->add_option("--n-b", c.n_b, "codeword length in bits");
    sub->add_option("--code", c.code,
                    "LDPC ensemble: regular-3-30|irregular-r075|irregular-r055");
    sub->add_option("--detector-capacity", c.detector_capacity,
                    "list detector capacity (0 = exhaustive)");
    sub->add_option("--total-iters", c.total_iters, "total decoder iterations per word");
    sub->add_option("--iters-per-detection", c.iters_per_detection,
                    "decoder iterations between detector calls");
    sub->add_option("--v-mode", c.v_mode, "probe channel factor: identity|haar");
    sub->add_option("--snr-grid-db", c.snr_grid_db, "Eb/N0 grid in dB (ascending)")
        ->delimiter(',');
    sub->add_option("--gamma-grid", c.gamma_grid, "linear SNR grid (ascending)")
        ->delimiter(',');
    sub->add_option("--n-trials", c.n_trials, "Monte Carlo trials per grid point");
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--workers", c.workers, "worker threads");
    sub->add_option("--noise-samples", c.noise_samples,
                    "noise draws per MI evaluation (even)");
    sub->add_option("--sphere-capacity", c.sphere_capacity,
                    "MI inner-sum truncation (0 = exact)");
    sub->add_option("--output", c.output, "CSV output path");
}

void check_config_exclusive(const CLI::App* sub) {
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_name();
        if (name == "--config" || name == "--help") continue;
        if (opt->count() > 0)
            throw mimo::ConfigError("--config cannot be combined with " + name);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mimo::ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo link simulator for quasi-static MIMO precoding"};
    app.require_subcommand(1);

    mimo::ExperimentConfig cfg;
    std::string config_path;
    const std::pair<const char*, const char*> names[] = {
        {"outage", "outage"},   {"wer", "wer"}, {"pcp", "pcp"},
        {"toy", "toy"},         {"haar-test", "haar_test"},
        {"mi-probe", "mi_probe"}};
    std::vector<SubCommand> subs;
    for (const auto& [cli_name, field_name] : names) {
        SubCommand sc;
        sc.app = app.add_subcommand(cli_name, std::string("run the ") + field_name +
                                                  " experiment");
        sc.experiment = field_name;
        add_common_options(sc.app, cfg, config_path);
        subs.push_back(sc);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const SubCommand* active = nullptr;
        for (const SubCommand& sc : subs)
            if (sc.app->parsed()) active = &sc;
        if (active == nullptr) throw mimo::ConfigError("no experiment selected");

        if (!config_path.empty()) {
            check_config_exclusive(active->app);
            cfg = mimo::parse_config_json(read_file(config_path));
            if (cfg.experiment != active->experiment)
                throw mimo::ConfigError("config file runs experiment '" + cfg.experiment +
                                        "' but the subcommand is '" + active->experiment +
                                        "'");
        } else {
            cfg.experiment = active->experiment;
            mimo::validate_config(cfg);
        }

        const mimo::RunResult result = mimo::run_experiment(cfg);
        mimo::write_results(cfg, result);
        std::printf("wrote %zu point%s to %s (manifest %s)\n", result.points.size(),
                    result.points.size() == 1 ? "" : "s", cfg.output.c_str(),
                    mimo::manifest_path_for(cfg.output).c_str());
        return 0;
    } catch (const mimo::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 3;
    }
}
