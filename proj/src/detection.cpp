#include "mimosim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mimosim/precoding.hpp"

namespace mimo {

CandidateSet candidate_set_from_alphabet(const VectorAlphabet& a) {
    CandidateSet cs;
    cs.vectors = a.vectors;
    cs.bits = a.bits_per_use;
    cs.cartesian = true;
    cs.mix = Eigen::MatrixXcd::Zero(a.n_tx, a.n_streams);
    for (int j = 0; j < a.n_streams; ++j) cs.mix(j, j) = 1.0;
    cs.axis = a.base;
    cs.scale = a.scale;
    cs.n_active = a.n_streams;
    return cs;
}

CandidateSet candidate_set_stc(const std::string& stc_id, const Constellation& c) {
    CandidateSet cs;
    cs.vectors = stc_block_vectors(stc_id, c);
    cs.bits = stc_symbols_per_block(stc_id) * c.bits;
    if (stc_id == "golden") {
        cs.cartesian = true;
        cs.mix = golden_generator();
        cs.axis = c;
        cs.scale = 1.0;
        cs.n_active = 4;
    } else {
        cs.cartesian = false;  // conjugations make the map only R-linear
    }
    return cs;
}

double candidate_metric(const DetectionProblem& p, int label) {
    return (p.y - p.h_eff * p.cands->vectors[label]).squaredNorm();
}

int ml_detect(const DetectionProblem& p) {
    if (p.cands == nullptr || p.cands->vectors.empty())
        throw std::invalid_argument("ml_detect: empty candidate set");
    int best = 0;
    double best_metric = candidate_metric(p, 0);
    const int n = static_cast<int>(p.cands->vectors.size());
    for (int l = 1; l < n; ++l) {
        const double m = candidate_metric(p, l);
        if (m < best_metric) {
            best_metric = m;
            best = l;
        }
    }
    return best;
}

namespace {

CandidateList exhaustive_list(const DetectionProblem& p, int capacity) {
    const int n = static_cast<int>(p.cands->vectors.size());
    CandidateList list;
    list.entries.resize(n);
    for (int l = 0; l < n; ++l) list.entries[l] = {l, candidate_metric(p, l)};
    auto cmp = [](const CandidateList::Entry& a, const CandidateList::Entry& b) {
        return a.metric != b.metric ? a.metric < b.metric : a.label < b.label;
    };
    if (capacity < n) {
        std::partial_sort(list.entries.begin(), list.entries.begin() + capacity,
                          list.entries.end(), cmp);
        list.entries.resize(capacity);
    } else {
        std::sort(list.entries.begin(), list.entries.end(), cmp);
    }
    return list;
}

struct HeapEntry {
    double metric;
    int label;
};

// Schnorr-Euchner depth-first enumeration over the real-valued embedding.
CandidateList schnorr_euchner_list(const DetectionProblem& p, int capacity) {
    const CandidateSet& cs = *p.cands;
    const int r = static_cast<int>(p.y.size());
    const Eigen::MatrixXcd a_c = p.h_eff * (cs.scale * cs.mix);
    const int axes_per_dim = cs.axis.has_q_axis ? 2 : 1;
    const int n = cs.n_active * axes_per_dim;
    if (2 * r < n) return exhaustive_list(p, capacity);  // underdetermined

    // Real embedding: columns ordered [dim0 I, dim0 Q, dim1 I, ...].
    Eigen::MatrixXd a_r(2 * r, n);
    for (int j = 0; j < cs.n_active; ++j) {
        a_r.col(axes_per_dim * j).head(r) = a_c.col(j).real();
        a_r.col(axes_per_dim * j).tail(r) = a_c.col(j).imag();
        if (axes_per_dim == 2) {
            a_r.col(axes_per_dim * j + 1).head(r) = -a_c.col(j).imag();
            a_r.col(axes_per_dim * j + 1).tail(r) = a_c.col(j).real();
        }
    }
    Eigen::VectorXd y_r(2 * r);
    y_r.head(r) = p.y.real();
    y_r.tail(r) = p.y.imag();

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a_r);
    const Eigen::MatrixXd rr =
        qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(rr(i, i)));
    for (int i = 0; i < n; ++i)
        if (std::abs(rr(i, i)) < 1e-9 * dmax) return exhaustive_list(p, capacity);
    const Eigen::VectorXd qty_full = qr.householderQ().transpose() * y_r;
    const Eigen::VectorXd ytil = qty_full.head(n);
    const double base = qty_full.tail(2 * r - n).squaredNorm();

    const auto& levels = cs.axis.levels;
    const int n_levels = static_cast<int>(levels.size());

    // Per-level enumeration state.
    std::vector<std::vector<int>> order(n, std::vector<int>(n_levels));
    std::vector<int> next(n, 0), chosen(n, 0);
    std::vector<double> partial(n + 1, 0.0);  // partial[i]: distance below level i
    std::vector<double> b(n, 0.0);
    Eigen::VectorXd z(n);

    std::vector<HeapEntry> heap;  // max-heap on (metric, label)
    heap.reserve(capacity);
    auto heap_cmp = [](const HeapEntry& x, const HeapEntry& y) {
        return x.metric != y.metric ? x.metric < y.metric : x.label < y.label;
    };
    double bound = std::numeric_limits<double>::infinity();
    const auto eps_of = [](double m) { return 1e-9 * (1.0 + m); };

    auto enter_level = [&](int i) {
        double acc = ytil[i];
        for (int j = i + 1; j < n; ++j) acc -= rr(i, j) * z[j];
        b[i] = acc;
        const double c = acc / rr(i, i);
        auto& ord = order[i];
        for (int k = 0; k < n_levels; ++k) ord[k] = k;
        std::sort(ord.begin(), ord.end(), [&](int x, int y) {
            const double dx = std::abs(levels[x] - c), dy = std::abs(levels[y] - c);
            return dx != dy ? dx < dy : x < y;
        });
        next[i] = 0;
    };

    int i = n - 1;
    partial[n] = base;
    enter_level(i);
    for (;;) {
        if (next[i] >= n_levels) {
            if (++i == n) break;
            ++next[i];  // resume the parent with its following candidate
            continue;
        }
        // Candidates are distance-ordered: once one violates the bound the
        // rest of this level does too.
        const int pos = order[i][next[i]];
        const double diff = b[i] - rr(i, i) * levels[pos];
        const double d = partial[i + 1] + diff * diff;
        if (d > bound + eps_of(bound)) {
            next[i] = n_levels;
            continue;
        }
        z[i] = levels[pos];
        chosen[i] = pos;
        if (i == 0) {
            int label = 0;
            for (int j = 0; j < cs.n_active; ++j) {
                const int pi = chosen[axes_per_dim * j];
                int sub = cs.axis.pattern_of_pos[pi];
                if (axes_per_dim == 2)
                    sub = (sub << cs.axis.axis_bits) |
                          cs.axis.pattern_of_pos[chosen[axes_per_dim * j + 1]];
                label = (label << cs.axis.bits) | sub;
            }
            const double exact = candidate_metric(p, label);
            if (static_cast<int>(heap.size()) < capacity) {
                heap.push_back({exact, label});
                std::push_heap(heap.begin(), heap.end(), heap_cmp);
            } else if (exact < heap.front().metric) {
                std::pop_heap(heap.begin(), heap.end(), heap_cmp);
                heap.back() = {exact, label};
                std::push_heap(heap.begin(), heap.end(), heap_cmp);
            }
            if (static_cast<int>(heap.size()) == capacity) bound = heap.front().metric;
            ++next[i];
        } else {
            partial[i] = d;
            --i;
            enter_level(i);
        }
    }

    CandidateList list;
    list.entries.reserve(heap.size());
    for (const auto& h : heap) list.entries.push_back({h.label, h.metric});
    std::sort(list.entries.begin(), list.entries.end(),
              [](const CandidateList::Entry& a, const CandidateList::Entry& b) {
                  return a.metric != b.metric ? a.metric < b.metric : a.label < b.label;
              });
    return list;
}

}  // namespace

CandidateList sphere_list(const DetectionProblem& p, int capacity) {
    if (p.cands == nullptr || p.cands->vectors.empty())
        throw std::invalid_argument("sphere_list: empty candidate set");
    if (capacity < 1) throw std::invalid_argument("sphere_list: capacity must be >= 1");
    const int n = static_cast<int>(p.cands->vectors.size());
    capacity = std::min(capacity, n);
    if (!p.cands->cartesian) return exhaustive_list(p, capacity);
    return schnorr_euchner_list(p, capacity);
}

std::vector<double> soft_llr(const DetectionProblem& p, const CandidateList& list,
                             double saturation) {
    if (p.cands == nullptr) throw std::invalid_argument("soft_llr: missing candidate set");
    if (list.entries.empty()) throw std::invalid_argument("soft_llr: empty candidate list");
    const int bits = p.cands->bits;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> min0(bits, inf), min1(bits, inf);
    for (const auto& e : list.entries) {
        double cost = e.metric;
        if (p.priors != nullptr) {
            for (int i = 0; i < bits; ++i)
                if ((e.label >> (bits - 1 - i)) & 1) cost -= p.priors[i];
        }
        for (int i = 0; i < bits; ++i) {
            auto& slot = ((e.label >> (bits - 1 - i)) & 1) ? min1[i] : min0[i];
            slot = std::min(slot, cost);
        }
    }
    std::vector<double> llr(bits);
    for (int i = 0; i < bits; ++i) {
        double v;
        if (min1[i] == inf)
            v = -saturation;
        else if (min0[i] == inf)
            v = saturation;
        else
            v = min0[i] - min1[i];
        llr[i] = std::clamp(v, -saturation, saturation);
    }
    return llr;
}

}  // namespace mimo
