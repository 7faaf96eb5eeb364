#pragma once
// Gray-labeled square QAM and the per-channel-use vector alphabets built from it.
#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace mimo {

// Unit-mean-energy scalar constellation. points[label] is the symbol whose bit
// pattern equals label (MSB first). Square QAM factors into two PAM axes, each
// Gray-labeled; the label is (I bits << axis_bits) | Q bits. BPSK has no Q axis.
struct Constellation {
    int order = 0;                    // M
    int bits = 0;                     // log2 M
    int axis_bits = 0;                // bits per PAM axis (== bits for BPSK)
    bool has_q_axis = false;
    std::vector<double> levels;       // PAM levels, ascending, scaled
    std::vector<int> pattern_of_pos;  // level position -> axis bit pattern
    std::vector<int> pos_of_pattern;  // axis bit pattern -> level position
    std::vector<std::complex<double>> points;
};

// M in {2, 4, 16, 64}. Mean energy 1; nearest neighbors differ in one bit.
Constellation build_qam(int order);

// Candidate transmit vectors for one channel use. min(n_tx, n_rx) components
// are active and carry independent QAM symbols; when n_rx < n_tx the trailing
// components are zero and the active ones are scaled by sqrt(n_tx / n_rx) so
// the mean vector energy stays n_tx. Component j carries bit slice
// [j*k, (j+1)*k) of the label, MSB first (k = log2 M).
struct VectorAlphabet {
    int n_tx = 0;
    int n_rx = 0;
    int n_streams = 0;       // active components
    int bits_per_use = 0;    // m = n_streams * log2 M
    double scale = 1.0;      // applied to each active component
    Constellation base;
    std::vector<Eigen::VectorXcd> vectors;  // size 2^m, index == label
};

VectorAlphabet build_vector_alphabet(const Constellation& c, int n_tx, int n_rx);

int map_bits(const VectorAlphabet& a, std::span<const int> bits);
std::vector<int> unmap_index(const VectorAlphabet& a, int index);

}  // namespace mimo
