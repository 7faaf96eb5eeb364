#include "mimosim/modulation.hpp"

#include <cmath>
#include <stdexcept>

namespace mimo {

Constellation build_qam(int order) {
    if (order != 2 && order != 4 && order != 16 && order != 64)
        throw std::invalid_argument("build_qam: order must be one of 2, 4, 16, 64");
    Constellation c;
    c.order = order;
    c.bits = 0;
    for (int m = order; m > 1; m >>= 1) ++c.bits;
    c.has_q_axis = order > 2;
    c.axis_bits = c.has_q_axis ? c.bits / 2 : c.bits;

    const int n_levels = 1 << c.axis_bits;
    // Mean symbol energy 1: each axis of an L-level PAM grid contributes
    // (L^2 - 1)/3 before scaling.
    const double axis_energy = (n_levels * n_levels - 1) / 3.0;
    const double scale =
        1.0 / std::sqrt(c.has_q_axis ? 2.0 * axis_energy : axis_energy);
    c.levels.resize(n_levels);
    c.pattern_of_pos.resize(n_levels);
    c.pos_of_pattern.resize(n_levels);
    for (int p = 0; p < n_levels; ++p) {
        c.levels[p] = scale * (2 * p - (n_levels - 1));
        // Reflected Gray order, flipped so the all-zeros pattern is the top level.
        const int q = n_levels - 1 - p;
        c.pattern_of_pos[p] = q ^ (q >> 1);
        c.pos_of_pattern[c.pattern_of_pos[p]] = p;
    }

    c.points.resize(order);
    for (int label = 0; label < order; ++label) {
        if (c.has_q_axis) {
            const int pi = c.pos_of_pattern[label >> c.axis_bits];
            const int pq = c.pos_of_pattern[label & ((1 << c.axis_bits) - 1)];
            c.points[label] = {c.levels[pi], c.levels[pq]};
        } else {
            c.points[label] = {c.levels[c.pos_of_pattern[label]], 0.0};
        }
    }
    return c;
}

VectorAlphabet build_vector_alphabet(const Constellation& c, int n_tx, int n_rx) {
    if (n_tx < 1 || n_rx < 1)
        throw std::invalid_argument("build_vector_alphabet: antenna counts must be >= 1");
    VectorAlphabet a;
    a.n_tx = n_tx;
    a.n_rx = n_rx;
    a.n_streams = std::min(n_tx, n_rx);
    a.bits_per_use = a.n_streams * c.bits;
    if (a.bits_per_use > 12)
        throw std::invalid_argument("build_vector_alphabet: alphabet larger than 4096");
    a.scale = n_rx < n_tx ? std::sqrt(static_cast<double>(n_tx) / n_rx) : 1.0;
    a.base = c;
    const int count = 1 << a.bits_per_use;
    a.vectors.resize(count);
    for (int label = 0; label < count; ++label) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_tx);
        for (int j = 0; j < a.n_streams; ++j) {
            const int shift = (a.n_streams - 1 - j) * c.bits;
            const int sub = (label >> shift) & (c.order - 1);
            v[j] = a.scale * c.points[sub];
        }
        a.vectors[label] = v;
    }
    return a;
}

int map_bits(const VectorAlphabet& a, std::span<const int> bits) {
    if (static_cast<int>(bits.size()) != a.bits_per_use)
        throw std::invalid_argument("map_bits: wrong bit count");
    int label = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("map_bits: bits must be 0/1");
        label = (label << 1) | b;
    }
    return label;
}

std::vector<int> unmap_index(const VectorAlphabet& a, int index) {
    if (index < 0 || index >= static_cast<int>(a.vectors.size()))
        throw std::invalid_argument("unmap_index: index out of range");
    std::vector<int> bits(a.bits_per_use);
    for (int i = 0; i < a.bits_per_use; ++i)
        bits[i] = (index >> (a.bits_per_use - 1 - i)) & 1;
    return bits;
}

}  // namespace mimo
