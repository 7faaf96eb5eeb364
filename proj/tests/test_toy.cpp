#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mimosim/toy.hpp"

using namespace mimo;

namespace {

constexpr double kGoodTheta = 27.0 * std::numbers::pi / 180.0;

double sample_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_SUITE("toy") {

TEST_CASE("mi vanishes at negligible snr") {
    MiConfig cfg;
    cfg.noise_samples = 256;
    for (double gamma : {1e-9, 1e-4}) {
        ToyChannel ch{1.0, 1.0, kGoodTheta, gamma};
        CHECK(toy_mutual_information(ch, cfg) < 0.01);
    }
}

TEST_CASE("mi saturates at two bits for a good rotation") {
    MiConfig cfg;
    cfg.noise_samples = 512;
    ToyChannel ch{1.0, 1.0, kGoodTheta, 1e4};
    CHECK(toy_mutual_information(ch, cfg) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("an erased component leaves exactly one bpsk stream") {
    // With beta2 = 0 and theta = 0 the second output is pure noise while the
    // first carries clean BPSK, so the MI must converge to 1 bit.
    MiConfig cfg;
    cfg.noise_samples = 4096;
    ToyChannel ch{1.0, 0.0, 0.0, 1e4};
    CHECK(toy_mutual_information(ch, cfg) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mi stays within zero and two bits") {
    MiConfig cfg;
    cfg.noise_samples = 64;
    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        ToyChannel ch;
        ch.beta1 = std::sqrt(rng.rayleigh_sq());
        ch.beta2 = std::sqrt(rng.rayleigh_sq());
        ch.theta = rng.uniform() * 2.0 * std::numbers::pi;
        ch.gamma = std::pow(10.0, 6.0 * rng.uniform() - 2.0);
        cfg.seed = 100 + rep;
        const double mi = toy_mutual_information(ch, cfg);
        CHECK(mi >= 0.0);
        CHECK(mi <= 2.0);
    }
}

TEST_CASE("mi is symmetric under quarter turns and gain swaps") {
    MiConfig cfg;
    cfg.noise_samples = 2048;
    const ToyChannel base{0.8, 1.2, 0.3, 6.0};

    // Monte Carlo std of a single estimate, over independent seeds.
    std::vector<double> ests;
    for (int k = 0; k < 12; ++k) {
        cfg.seed = 1000 + k;
        ests.push_back(toy_mutual_information(base, cfg));
    }
    const double mc_std = sample_std(ests);
    REQUIRE(mc_std > 0.0);

    for (int k = 0; k < 12; ++k) {
        cfg.seed = 1000 + k;
        ToyChannel quarter = base;
        quarter.theta = base.theta + std::numbers::pi / 2.0;
        CHECK(std::abs(ests[k] - toy_mutual_information(quarter, cfg)) < 2.0 * mc_std);

        ToyChannel swapped{base.beta2, base.beta1,
                           std::numbers::pi / 2.0 - base.theta, base.gamma};
        CHECK(std::abs(ests[k] - toy_mutual_information(swapped, cfg)) < 2.0 * mc_std);
    }
}

TEST_CASE("minimum difference component grows linearly near zero angle") {
    const double theta = 0.01;
    const double ratio = toy_min_difference_component(theta) / (std::sqrt(2.0) * theta);
    CHECK(ratio > 0.9999);
    CHECK(ratio < 1.0001);
    // At multiples of pi/4 some difference component collapses entirely.
    CHECK(toy_min_difference_component(0.0) == 0.0);
    CHECK(toy_min_difference_component(std::numbers::pi / 4.0) < 1e-15);
    // The good angle keeps every component bounded away from zero.
    CHECK(toy_min_difference_component(kGoodTheta) > 0.2);
}

TEST_CASE("outage runs are reproducible and worker-count invariant") {
    ToyOutageConfig cfg;
    cfg.mode = ToyThetaMode::fixed;
    cfg.theta = 0.0;
    cfg.n_trials = 20000;
    cfg.seed = 9;
    cfg.mi.noise_samples = 64;
    const auto a = toy_outage(cfg, 100.0);
    const auto b = toy_outage(cfg, 100.0);
    CHECK(a.value == b.value);
    cfg.workers = 4;
    const auto c = toy_outage(cfg, 100.0);
    CHECK(a.value == c.value);
    CHECK(a.ci_low == c.ci_low);
    CHECK(a.value > 0.0);
}

TEST_CASE("random rotations sit between the bad and good fixed angles") {
    ToyOutageConfig cfg;
    cfg.n_trials = 30000;
    cfg.seed = 11;
    cfg.mi.noise_samples = 64;
    const double gamma = 1e3;
    cfg.mode = ToyThetaMode::fixed;
    cfg.theta = 0.0;
    const double p_bad = toy_outage(cfg, gamma).value;
    cfg.theta = kGoodTheta;
    const double p_good = toy_outage(cfg, gamma).value;
    cfg.mode = ToyThetaMode::random_uniform;
    const double p_rand = toy_outage(cfg, gamma).value;
    CHECK(p_good < p_rand);
    CHECK(p_rand < p_bad);
}

TEST_CASE("invalid channels and configs are rejected") {
    MiConfig cfg;
    CHECK_THROWS_AS(toy_mutual_information({-0.1, 1.0, 0.0, 1.0}, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(toy_mutual_information({1.0, 1.0, -0.5, 1.0}, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(toy_mutual_information({1.0, 1.0, 2.0 * std::numbers::pi, 1.0}, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(toy_mutual_information({1.0, 1.0, 0.0, 0.0}, cfg),
                    std::invalid_argument);
    MiConfig odd;
    odd.noise_samples = 5;
    CHECK_THROWS_AS(toy_mutual_information({1.0, 1.0, 0.0, 1.0}, odd),
                    std::invalid_argument);

    ToyOutageConfig oc;
    oc.n_trials = 0;
    CHECK_THROWS_AS(toy_outage(oc, 10.0), std::invalid_argument);
    oc.n_trials = 10;
    oc.r_c = 0.0;
    CHECK_THROWS_AS(toy_outage(oc, 10.0), std::invalid_argument);
    oc.r_c = 1.5;
    CHECK_THROWS_AS(toy_outage(oc, 10.0), std::invalid_argument);
}

}  // TEST_SUITE
