#pragma once

// Goodness-of-fit helpers shared by the diagnostics and the tests.

#include <cstddef>
#include <functional>
#include <vector>

namespace bdm::stats {

struct TestResult {
    double statistic;
    double p_value;
    double dof = 0.0;
};

/// Kolmogorov limiting survival function P(K > lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// One-sample KS test of the sample against a continuous CDF.
TestResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample KS test; statistic is sup |F_a - F_b|.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson goodness of fit of integer observations against probabilities p[k]
/// (the last cell absorbs the upper tail). Adjacent cells are merged from the
/// top until every expected count is at least min_expected.
TestResult chi_square_gof(const std::vector<std::size_t>& observed_values, const std::vector<double>& p,
                          double min_expected = 5.0);

/// Two-sample chi-square homogeneity test on integer-valued samples, merging
/// sparse upper cells until every pooled cell has at least min_pooled counts.
TestResult chi_square_two_sample(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                 double min_pooled = 10.0);

/// P(chi^2_dof > x).
double chi_square_survival(double x, double dof);

/// Dvoretzky-Kiefer-Wolfowitz half-width: sup |F_n - F| <= eps with probability 1 - alpha.
double dkw_epsilon(std::size_t n, double alpha);

/// Empirical probability vector of integer observations.
std::vector<double> frequencies(const std::vector<std::size_t>& values);

/// Total variation between two probability vectors (zero-padded).
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

double mean(const std::vector<double>& v);
/// Standard error of the mean.
double standard_error(const std::vector<double>& v);

/// Poisson(lambda) probabilities for k = 0..kmax.
std::vector<double> poisson_pmf(double lambda, std::size_t kmax);

} // namespace bdm::stats
