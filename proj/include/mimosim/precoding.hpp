#pragma once
// Time-varying unitary precoder schedules and space-time block codes.
#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mimosim/modulation.hpp"
#include "mimosim/rng.hpp"

namespace mimo {

enum class ScheduleKind { identity, fixed_random, segment_haar, toy_rotation, stc };

// Per-channel-use unitary precoder P_t. segment_haar splits n_uses into
// n_segments contiguous runs (remainder appended to the last run) and draws an
// independent Haar unitary per run; fixed_random is one Haar draw for all t.
struct PrecoderSchedule {
    ScheduleKind kind = ScheduleKind::identity;
    int n_tx = 0;
    long n_uses = 0;
    int n_segments = 1;
    double theta = 0.0;       // toy_rotation angle (radians)
    std::string stc_id;       // "alamouti" | "golden"
    std::vector<Eigen::MatrixXcd> mats;

    int segment_of(long t) const;
    const Eigen::MatrixXcd& at(long t) const;
};

PrecoderSchedule make_schedule(ScheduleKind kind, int n_tx, long n_uses, int n_segments,
                               std::uint64_t seed, double theta = 0.0,
                               const std::string& stc_id = {});

// z = (a, b) -> 2x2 block whose columns are the two transmit vectors.
Eigen::MatrixXcd alamouti_block(std::complex<double> a, std::complex<double> b);

// 4x4 unitary generator of the golden code acting on (a, b, c, d); codeword
// entries are the column-major vectorization (X11, X21, X12, X22).
Eigen::MatrixXcd golden_generator();

int stc_block_length(const std::string& stc_id);   // channel uses per block
int stc_symbols_per_block(const std::string& stc_id);

// All vectorized codeword blocks for symbols drawn from c; index == label of
// the concatenated symbol bit patterns (first symbol = most significant bits).
std::vector<Eigen::VectorXcd> stc_block_vectors(const std::string& stc_id,
                                                const Constellation& c);

// Largest coding rate for which a schedule with N segments can still reach
// full diversity: 1 - 1/N + 1/(n_tx * N).
double max_rate_bound_segments(int n_segments, int n_tx, int n_rx);

}  // namespace mimo
