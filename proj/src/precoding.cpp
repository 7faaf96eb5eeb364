#include "mimosim/precoding.hpp"

#include <cmath>
#include <stdexcept>

#include "mimosim/randmat.hpp"

namespace mimo {

int PrecoderSchedule::segment_of(long t) const {
    if (t < 0 || t >= n_uses) throw std::out_of_range("PrecoderSchedule: t out of range");
    if (n_segments <= 1) return 0;
    const long seg_len = n_uses / n_segments;
    const long s = t / seg_len;
    return static_cast<int>(s >= n_segments ? n_segments - 1 : s);
}

const Eigen::MatrixXcd& PrecoderSchedule::at(long t) const { return mats[segment_of(t)]; }

PrecoderSchedule make_schedule(ScheduleKind kind, int n_tx, long n_uses, int n_segments,
                               std::uint64_t seed, double theta, const std::string& stc_id) {
    if (n_tx < 1) throw std::invalid_argument("make_schedule: n_tx must be >= 1");
    if (n_uses < 1) throw std::invalid_argument("make_schedule: n_uses must be >= 1");
    PrecoderSchedule s;
    s.kind = kind;
    s.n_tx = n_tx;
    s.n_uses = n_uses;
    s.theta = theta;
    s.stc_id = stc_id;
    switch (kind) {
        case ScheduleKind::identity:
            s.n_segments = 1;
            s.mats = {Eigen::MatrixXcd::Identity(n_tx, n_tx)};
            break;
        case ScheduleKind::fixed_random: {
            s.n_segments = 1;
            Rng rng(seed);
            s.mats = {sample_haar_unitary(n_tx, rng)};
            break;
        }
        case ScheduleKind::segment_haar: {
            if (n_segments < 1 || n_segments > n_uses)
                throw std::invalid_argument(
                    "make_schedule: n_segments must be in [1, n_uses]");
            s.n_segments = n_segments;
            s.mats.reserve(n_segments);
            for (int k = 0; k < n_segments; ++k) {
                Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
                s.mats.push_back(sample_haar_unitary(n_tx, rng));
            }
            break;
        }
        case ScheduleKind::toy_rotation: {
            if (n_tx != 2)
                throw std::invalid_argument("make_schedule: toy_rotation needs n_tx == 2");
            s.n_segments = 1;
            Eigen::MatrixXcd q(2, 2);
            q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
            s.mats = {q};
            break;
        }
        case ScheduleKind::stc: {
            if (stc_id != "alamouti" && stc_id != "golden")
                throw std::invalid_argument("make_schedule: unknown stc id");
            s.n_segments = 1;
            s.mats = {Eigen::MatrixXcd::Identity(n_tx, n_tx)};
            break;
        }
    }
    return s;
}

Eigen::MatrixXcd alamouti_block(std::complex<double> a, std::complex<double> b) {
    Eigen::MatrixXcd x(2, 2);
    x << a, -std::conj(b), b, std::conj(a);
    return x;
}

Eigen::MatrixXcd golden_generator() {
    using cd = std::complex<double>;
    const double s5 = std::sqrt(5.0);
    const double th = (1.0 + s5) / 2.0;
    const double thb = (1.0 - s5) / 2.0;
    const cd i(0.0, 1.0);
    const cd al = cd(1.0, 0.0) + i * (1.0 - th);
    const cd alb = cd(1.0, 0.0) + i * (1.0 - thb);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(4, 4);
    // rows: X11, X21, X12, X22 over symbols (a, b, c, d)
    g(0, 0) = al;
    g(0, 1) = al * th;
    g(1, 2) = i * alb;
    g(1, 3) = i * alb * thb;
    g(2, 2) = al;
    g(2, 3) = al * th;
    g(3, 0) = alb;
    g(3, 1) = alb * thb;
    return g / s5;
}

int stc_block_length(const std::string& stc_id) {
    if (stc_id == "alamouti" || stc_id == "golden") return 2;
    throw std::invalid_argument("stc_block_length: unknown stc id");
}

int stc_symbols_per_block(const std::string& stc_id) {
    if (stc_id == "alamouti") return 2;
    if (stc_id == "golden") return 4;
    throw std::invalid_argument("stc_symbols_per_block: unknown stc id");
}

std::vector<Eigen::VectorXcd> stc_block_vectors(const std::string& stc_id,
                                                const Constellation& c) {
    const int n_sym = stc_symbols_per_block(stc_id);
    const long count = 1L << (n_sym * c.bits);
    std::vector<Eigen::VectorXcd> out;
    out.reserve(count);
    if (stc_id == "alamouti") {
        for (long label = 0; label < count; ++label) {
            const auto a = c.points[(label >> c.bits) & (c.order - 1)];
            const auto b = c.points[label & (c.order - 1)];
            Eigen::VectorXcd v(4);
            v << a, b, -std::conj(b), std::conj(a);
            out.push_back(v);
        }
    } else {
        const Eigen::MatrixXcd g = golden_generator();
        Eigen::VectorXcd z(4);
        for (long label = 0; label < count; ++label) {
            for (int j = 0; j < 4; ++j)
                z[j] = c.points[(label >> ((3 - j) * c.bits)) & (c.order - 1)];
            out.push_back(g * z);
        }
    }
    return out;
}

double max_rate_bound_segments(int n_segments, int n_tx, int n_rx) {
    if (n_segments < 1 || n_tx < 1 || n_rx < 1)
        throw std::invalid_argument("max_rate_bound_segments: arguments must be >= 1");
    return 1.0 - 1.0 / n_segments + 1.0 / (static_cast<double>(n_tx) * n_segments);
}

}  // namespace mimo
