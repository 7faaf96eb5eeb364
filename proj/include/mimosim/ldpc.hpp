#pragma once
// LDPC code construction (progressive edge growth), systematic encoding,
// flooding sum-product decoding, and the iterative detection-decoding chain
// that produces coded word-error-rate estimates.
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mimosim/information.hpp"
#include "mimosim/precoding.hpp"
#include "mimosim/stats.hpp"

namespace mimo {

struct DegreeDistributions {
    // Edge-perspective polynomials: (node degree d, coefficient of x^(d-1)).
    std::vector<std::pair<int, double>> lambda;  // variable side
    std::vector<std::pair<int, double>> rho;     // check side

    void validate() const;       // nonnegative, each sums to 1 within 1e-9
    double design_rate() const;  // 1 - int(rho) / int(lambda)

    static DegreeDistributions regular(int d_var, int d_check);
    static DegreeDistributions irregular_r075();  // design rate ~0.75
    static DegreeDistributions irregular_r055();  // design rate ~0.55
};

struct TannerGraph {
    int n_vars = 0;
    int n_checks = 0;
    std::vector<std::vector<int>> var_adj;    // checks touching each variable
    std::vector<std::vector<int>> check_adj;  // variables touching each check

    // Systematic encoder from Gaussian elimination of the parity-check
    // matrix: info bits occupy info_cols, each parity column is the GF(2)
    // inner product of its encoder row with the info bits.
    int k_info = 0;
    std::vector<int> info_cols;
    std::vector<int> parity_cols;
    std::vector<std::vector<std::uint64_t>> enc_rows;  // parity_cols.size() rows
};

// Deterministic progressive-edge-growth construction for the degree
// distributions, followed by encoder derivation. method must be "peg".
TannerGraph build_code(int n_b, const DegreeDistributions& dd, std::uint64_t seed,
                       const std::string& method = "peg");

std::vector<std::uint8_t> encode(const TannerGraph& g, std::span<const std::uint8_t> info);
bool check_syndrome(const TannerGraph& g, std::span<const std::uint8_t> word);

// Parity-check matrix in alist text format.
void write_alist(const TannerGraph& g, const std::string& path);

// Flooding sum-product decoder. LLR convention everywhere: positive means
// bit 1. Messages persist across set_channel_llrs so detection feedback
// rounds continue rather than restart belief propagation.
class SumProductDecoder {
  public:
    explicit SumProductDecoder(const TannerGraph& g);
    void reset();
    void set_channel_llrs(std::span<const double> llrs);
    bool run(int iters);  // true once the syndrome is satisfied
    int iterations_done() const { return iters_done_; }
    std::vector<double> posterior_llrs() const;
    std::vector<std::uint8_t> hard_bits() const;

  private:
    void refresh_totals();
    bool syndrome_ok() const;

    const TannerGraph* g_;
    std::vector<int> check_offset_;  // CSR over edges, by check
    std::vector<int> edge_var_;
    std::vector<std::vector<int>> var_edges_;
    std::vector<double> r_;      // check-to-variable messages (internal sign)
    std::vector<double> mu_ch_;  // channel terms (internal sign)
    std::vector<double> total_;
    int iters_done_ = 0;
};

struct DecodeResult {
    std::vector<std::uint8_t> bits;
    bool converged = false;
    int iterations = 0;
};

DecodeResult decode_sum_product(const TannerGraph& g, std::span<const double> llrs,
                                int max_iters);

struct CodedChainConfig {
    int n_tx = 2;
    int n_rx = 2;
    int m_order = 4;
    ScheduleKind schedule = ScheduleKind::segment_haar;
    int n_segments = 10;       // segment_haar
    std::string stc_id;        // stc schedules
    const TannerGraph* code = nullptr;
    long long n_words = 0;
    std::uint64_t seed = 1;
    int workers = 1;
    int detector_capacity = 0;  // 0 = exhaustive soft demapping
    int total_iters = 100;
    int iters_per_detection = 10;
    double llr_saturation = 40.0;
};

// Word error rate of the full chain: encode, interleave, map, precode, one
// channel draw per word, iterate detection and decoding with extrinsic
// exchange, count words with any info-bit error.
MonteCarloEstimate coded_wer(const CodedChainConfig& cfg, double gamma);

}  // namespace mimo
