#pragma once
// Experiment orchestration: validated configuration, SNR-axis conversion,
// per-point dispatch into the estimation modules, and CSV/manifest output.
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimosim/stats.hpp"

namespace mimo {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One flat configuration type shared by every experiment; validation enforces
// the per-experiment requirements. JSON keys match the field names exactly
// and unknown keys are rejected.
struct ExperimentConfig {
    std::string experiment;  // outage | wer | pcp | toy | haar_test | mi_probe

    int n_tx = 2;
    int n_rx = 2;
    int modulation = 4;

    // outage / wer
    std::string scheme = "none";  // none|fixed|emi|emi_n|golden|alamouti
    int n_segments = 10;          // emi_n
    int n_precoders = 100;        // emi averaging depth
    double rate = 0.0;            // outage target spectral efficiency (bpcu)

    // toy
    std::string theta_mode = "fixed";  // fixed | random_uniform
    double theta = 0.0;                // radians
    double r_c = 0.9;

    // pcp
    std::string corrupt_set = "sc1";  // sc1 | sc2 | sc3
    double p_exponent = 2.0;
    bool single_pair = false;

    // wer
    int n_b = 1440;
    std::string code = "regular-3-30";  // | irregular-r075 | irregular-r055
    int detector_capacity = 0;          // 0 = exhaustive demapping
    int total_iters = 100;
    int iters_per_detection = 10;

    // mi_probe
    std::string v_mode = "haar";  // identity | haar

    // SNR axis: exactly one grid is given. snr_grid_db holds Eb/N0 in dB and
    // is converted per point; gamma_grid holds linear SNR values directly (the
    // CSV then reports 10*log10(gamma) in the first column).
    std::vector<double> snr_grid_db;
    std::vector<double> gamma_grid;

    long long n_trials = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    int noise_samples = 64;
    int sphere_capacity = 0;
    std::string output = "results.csv";
};

// gamma = rate * 10^(eb_n0_db / 10) / (n_tx * n_rx)
double convert_snr(double eb_n0_db, double rate, int n_tx, int n_rx);

ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
void validate_config(const ExperimentConfig& cfg);

struct RunPoint {
    double snr_db = 0.0;  // first CSV column
    double gamma = 0.0;
    MonteCarloEstimate est;
    double seconds = 0.0;
};

struct RunResult {
    std::vector<RunPoint> points;
    std::string extra_json;  // experiment-specific report ("{}" if none)
};

// Computes every grid point. Throws ConfigError for configuration problems
// and std::runtime_error for numeric/runtime failures.
RunResult run_experiment(const ExperimentConfig& cfg);

// CSV (header snr_eb_n0_db,gamma,estimate,ci_low,ci_high,n_trials,seconds)
// plus an adjacent <output>.manifest.json holding the full config.
void write_results(const ExperimentConfig& cfg, const RunResult& result);

std::string manifest_path_for(const std::string& output);

}  // namespace mimo
