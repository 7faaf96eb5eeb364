#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "mimosim/precoding.hpp"
#include "mimosim/rng.hpp"
#include "mimosim/stats.hpp"

using namespace mimo;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cplx = std::complex<double>;

namespace {

double unitarity_error(const MatrixXcd& p) {
    return (p.adjoint() * p - MatrixXcd::Identity(p.cols(), p.cols()))
        .cwiseAbs()
        .maxCoeff();
}

}  // namespace

TEST_SUITE("precoding") {

TEST_CASE("identity schedule emits the identity everywhere") {
    const auto s = make_schedule(ScheduleKind::identity, 3, 100, 1, 9);
    for (long t : {0L, 1L, 57L, 99L})
        CHECK((s.at(t) - MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("segment schedule splits uses into equal runs with remainder at the end") {
    const auto s = make_schedule(ScheduleKind::segment_haar, 2, 1440, 10, 21);
    CHECK(s.mats.size() == 10);
    CHECK(s.segment_of(0) == 0);
    CHECK(s.segment_of(143) == 0);
    CHECK(s.segment_of(144) == 1);
    CHECK(s.segment_of(1439) == 9);
    // The ten matrices are pairwise distinct and unitary.
    for (std::size_t i = 0; i < s.mats.size(); ++i) {
        CHECK(unitarity_error(s.mats[i]) < 1e-10);
        for (std::size_t j = i + 1; j < s.mats.size(); ++j)
            CHECK((s.mats[i] - s.mats[j]).cwiseAbs().maxCoeff() > 1e-6);
    }

    const auto r = make_schedule(ScheduleKind::segment_haar, 2, 1445, 10, 21);
    CHECK(r.mats.size() == 10);
    CHECK(r.segment_of(1439) == 9);
    CHECK(r.segment_of(1444) == 9);  // remainder rides in the last segment
    CHECK(r.segment_of(1440) == 9);
}

TEST_CASE("segment count must not exceed the channel uses") {
    CHECK_THROWS(make_schedule(ScheduleKind::segment_haar, 2, 5, 10, 1));
    CHECK_THROWS(make_schedule(ScheduleKind::segment_haar, 2, 10, 0, 1));
}

TEST_CASE("fixed random schedule repeats one draw and is seed-deterministic") {
    const auto a = make_schedule(ScheduleKind::fixed_random, 2, 64, 1, 77);
    const auto b = make_schedule(ScheduleKind::fixed_random, 2, 64, 1, 77);
    const auto c = make_schedule(ScheduleKind::fixed_random, 2, 64, 1, 78);
    CHECK((a.at(0) - a.at(63)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.at(0) - b.at(0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.at(0) - c.at(0)).cwiseAbs().maxCoeff() > 1e-6);
    CHECK(unitarity_error(a.at(0)) < 1e-10);
}

TEST_CASE("toy rotation applies the plane rotation") {
    const double th = 27.0 * std::acos(-1.0) / 180.0;
    const auto s = make_schedule(ScheduleKind::toy_rotation, 2, 8, 1, 0, th);
    VectorXcd z(2);
    z << 1.0, 1.0;
    const VectorXcd x = s.at(3) * z;
    CHECK(x[0].real() == doctest::Approx(std::cos(th) - std::sin(th)).epsilon(1e-12));
    CHECK(x[1].real() == doctest::Approx(std::sin(th) + std::cos(th)).epsilon(1e-12));
    CHECK(std::abs(x[0].imag()) == 0.0);
    // Values as printed to 4 digits: (0.4372, 1.3450) within 5e-4.
    CHECK(std::abs(x[0].real() - 0.4372) < 5e-4);
    CHECK(std::abs(x[1].real() - 1.3450) < 5e-4);
    CHECK(unitarity_error(s.at(0)) < 1e-12);
}

TEST_CASE("precoding preserves vector norms") {
    Rng rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        const auto s = make_schedule(ScheduleKind::segment_haar, 3, 30, 3,
                                     rng.next_u64());
        VectorXcd z(3);
        for (int i = 0; i < 3; ++i) z[i] = rng.cgaussian();
        const long t = static_cast<long>(rng.next_u64() % 30);
        CHECK(std::abs((s.at(t) * z).norm() - z.norm()) < 1e-12 * z.norm());
    }
}

TEST_CASE("segment draws match haar first-entry statistics") {
    std::vector<double> e;
    for (int i = 0; i < 4000; ++i) {
        const auto s =
            make_schedule(ScheduleKind::segment_haar, 2, 4, 2, 50000 + i);
        e.push_back(std::norm(s.mats[0](0, 0)));
        e.push_back(std::norm(s.mats[1](0, 0)));
    }
    // |entry|^2 of a 2x2 Haar unitary is uniform on [0, 1].
    const double d = ks_statistic(e, [](double x) { return x; });
    const double n = static_cast<double>(e.size());
    const double p = kolmogorov_sf((std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d);
    CHECK(p > 0.01);
}

TEST_CASE("alamouti block structure and orthogonality") {
    const cplx a{0.3, -1.2}, b{-0.7, 0.25};
    const MatrixXcd x = alamouti_block(a, b);
    CHECK(x(0, 0) == a);
    CHECK(x(1, 0) == b);
    CHECK(x(0, 1) == -std::conj(b));
    CHECK(x(1, 1) == std::conj(a));
    CHECK(std::abs((x.col(0).adjoint() * x.col(1))(0, 0)) == doctest::Approx(0.0));

    const MatrixXcd bpsk = alamouti_block(1.0, 1.0);
    CHECK(bpsk(0, 0) == cplx{1.0});
    CHECK(bpsk(0, 1) == cplx{-1.0});
    CHECK(bpsk(1, 0) == cplx{1.0});
    CHECK(bpsk(1, 1) == cplx{1.0});
}

TEST_CASE("golden generator is unitary and preserves block energy") {
    const MatrixXcd g = golden_generator();
    CHECK(g.rows() == 4);
    CHECK(unitarity_error(g) < 1e-10);

    const auto blocks = stc_block_vectors("golden", build_qam(4));
    CHECK(blocks.size() == 256);
    double e = 0.0;
    for (const auto& v : blocks) e += v.squaredNorm();
    // Average energy per channel use equals n_T = 2 over the 2-use block.
    CHECK(e / (256.0 * 2.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("golden code determinants do not vanish") {
    const auto blocks = stc_block_vectors("golden", build_qam(4));
    Rng rng(31337);
    double dmin = 1e300;
    for (int rep = 0; rep < 10000; ++rep) {
        const int i = static_cast<int>(rng.next_u64() % 256);
        int j = static_cast<int>(rng.next_u64() % 256);
        if (i == j) j = (j + 1) % 256;
        const VectorXcd d = blocks[i] - blocks[j];
        // Vector layout is column-major: (X11, X21, X12, X22).
        const cplx det = d[0] * d[3] - d[2] * d[1];
        dmin = std::min(dmin, std::abs(det));
    }
    CHECK(dmin > 0.44);
}

TEST_CASE("alamouti block vectors cover bpsk labels") {
    const auto blocks = stc_block_vectors("alamouti", build_qam(2));
    CHECK(blocks.size() == 4);
    CHECK(stc_block_length("alamouti") == 2);
    CHECK(stc_symbols_per_block("alamouti") == 2);
    CHECK(stc_block_length("golden") == 2);
    CHECK(stc_symbols_per_block("golden") == 4);
    // Label 0 is (bit 0, bit 0); with the BPSK map both symbols equal the
    // label-0 point s0, giving the block [[s0, -s0], [s0, s0]] vectorized.
    const auto c = build_qam(2);
    const cplx s0 = c.points[0];
    const VectorXcd& v = blocks[0];
    CHECK(v[0] == s0);
    CHECK(v[1] == s0);
    CHECK(v[2] == -std::conj(s0));
    CHECK(v[3] == std::conj(s0));
    CHECK_THROWS(stc_block_vectors("unknown-code", c));
}

TEST_CASE("max segment rate bound") {
    CHECK(max_rate_bound_segments(2, 2, 2) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(max_rate_bound_segments(10, 2, 2) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(max_rate_bound_segments(1000000000, 2, 2) ==
          doctest::Approx(1.0).epsilon(1e-8));
}

}  // TEST_SUITE
