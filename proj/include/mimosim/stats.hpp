#pragma once
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mimo {

struct MonteCarloEstimate {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long long n_trials = 0;
    std::uint64_t seed = 0;
};

// Wilson score interval for a binomial proportion (95% by default).
MonteCarloEstimate wilson_estimate(long long hits, long long trials, std::uint64_t seed,
                                   double z = 1.959963984540054);

// One-sample Kolmogorov-Smirnov statistic against a CDF. Copies and sorts.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

// Two-sample KS test p-value (asymptotic).
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mimo
