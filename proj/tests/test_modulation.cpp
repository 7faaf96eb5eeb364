#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "mimosim/modulation.hpp"

using namespace mimo;

namespace {

double mean_energy(const Constellation& c) {
    double e = 0.0;
    for (auto z : c.points) e += std::norm(z);
    return e / c.order;
}

int bit_difference(int a, int b) { return __builtin_popcount(a ^ b); }

}  // namespace

TEST_SUITE("modulation") {

TEST_CASE("bpsk is the unit pair") {
    const auto c = build_qam(2);
    CHECK(c.order == 2);
    CHECK(c.bits == 1);
    CHECK(c.points.size() == 2);
    std::set<double> reals;
    for (auto z : c.points) {
        CHECK(z.imag() == 0.0);
        reals.insert(z.real());
    }
    CHECK(reals == std::set<double>{-1.0, 1.0});
}

TEST_CASE("4-qam is the scaled corner grid with unit energy") {
    const auto c = build_qam(4);
    CHECK(c.order == 4);
    CHECK(c.bits == 2);
    const double h = 1.0 / std::sqrt(2.0);
    std::set<std::pair<double, double>> pts;
    for (auto z : c.points) {
        CHECK(std::abs(std::abs(z.real()) - h) < 1e-12);
        CHECK(std::abs(std::abs(z.imag()) - h) < 1e-12);
        pts.insert({z.real(), z.imag()});
    }
    CHECK(pts.size() == 4);
    CHECK(mean_energy(c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("all supported orders have unit mean energy and distinct points") {
    for (int m : {2, 4, 16, 64}) {
        const auto c = build_qam(m);
        CHECK(static_cast<int>(c.points.size()) == m);
        CHECK(mean_energy(c) == doctest::Approx(1.0).epsilon(1e-12));
        std::set<std::pair<double, double>> pts;
        for (auto z : c.points) pts.insert({z.real(), z.imag()});
        CHECK(static_cast<int>(pts.size()) == m);
    }
    CHECK_THROWS(build_qam(8));
    CHECK_THROWS(build_qam(3));
    CHECK_THROWS(build_qam(0));
}

TEST_CASE("nearest neighbors differ in exactly one bit") {
    for (int m : {4, 16, 64}) {
        const auto c = build_qam(m);
        // Find the minimum pairwise distance, then check all pairs at it.
        double dmin = 1e300;
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                dmin = std::min(dmin, std::abs(c.points[a] - c.points[b]));
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                if (std::abs(c.points[a] - c.points[b]) < dmin * 1.000001)
                    CHECK(bit_difference(a, b) == 1);
    }
}

TEST_CASE("square vector alphabet enumerates the cartesian product") {
    const auto a = build_vector_alphabet(build_qam(4), 2, 2);
    CHECK(a.n_streams == 2);
    CHECK(a.bits_per_use == 4);
    CHECK(a.vectors.size() == 16);
    CHECK(a.scale == doctest::Approx(1.0));
    double e = 0.0;
    std::set<std::pair<double, double>> first;
    for (const auto& v : a.vectors) {
        CHECK(v.size() == 2);
        e += v.squaredNorm();
        first.insert({v[0].real(), v[0].imag()});
    }
    CHECK(e / 16.0 == doctest::Approx(2.0).epsilon(1e-12));  // E[||x||^2] = n_T
    CHECK(first.size() == 4);
}

TEST_CASE("bpsk 1x1 alphabet") {
    const auto a = build_vector_alphabet(build_qam(2), 1, 1);
    CHECK(a.vectors.size() == 2);
    CHECK(a.bits_per_use == 1);
    CHECK(a.vectors[0].size() == 1);
}

TEST_CASE("fat channel pads zeros and rescales active components") {
    const auto a = build_vector_alphabet(build_qam(4), 2, 1);
    CHECK(a.n_streams == 1);
    CHECK(a.bits_per_use == 2);
    CHECK(a.vectors.size() == 4);
    double e = 0.0;
    for (const auto& v : a.vectors) {
        CHECK(v.size() == 2);
        CHECK(std::abs(v[1]) == 0.0);                       // structural zero
        CHECK(std::abs(v[0]) == doctest::Approx(std::sqrt(2.0) * 1.0).epsilon(1e-12));
        e += v.squaredNorm();
    }
    CHECK(e / 4.0 == doctest::Approx(2.0).epsilon(1e-12));  // still n_T

    const auto b = build_vector_alphabet(build_qam(4), 3, 2);
    CHECK(b.n_streams == 2);
    for (const auto& v : b.vectors) CHECK(std::abs(v[2]) == 0.0);
    double eb = 0.0;
    for (const auto& v : b.vectors) eb += v.squaredNorm();
    CHECK(eb / b.vectors.size() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("bit mapping round-trips for every label") {
    for (auto [m, t, r] : {std::tuple{4, 2, 2}, {16, 2, 2}, {4, 3, 3}, {4, 2, 1}}) {
        const auto a = build_vector_alphabet(build_qam(m), t, r);
        for (int label = 0; label < static_cast<int>(a.vectors.size()); ++label) {
            const auto bits = unmap_index(a, label);
            CHECK(static_cast<int>(bits.size()) == a.bits_per_use);
            CHECK(map_bits(a, bits) == label);
        }
    }
}

TEST_CASE("component labels occupy msb-first slices") {
    const auto a = build_vector_alphabet(build_qam(4), 2, 2);
    const auto c = build_qam(4);
    for (int label = 0; label < 16; ++label) {
        const int hi = (label >> 2) & 3;  // first component's scalar label
        const int lo = label & 3;
        CHECK(std::abs(a.vectors[label][0] - c.points[hi]) < 1e-12);
        CHECK(std::abs(a.vectors[label][1] - c.points[lo]) < 1e-12);
    }
}

TEST_CASE("map_bits validates input length") {
    const auto a = build_vector_alphabet(build_qam(4), 2, 2);
    std::vector<int> three(3, 0);
    CHECK_THROWS(map_bits(a, three));
}

}  // TEST_SUITE
