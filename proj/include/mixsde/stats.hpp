#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mixsde::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
/// Standard error of the sample mean.
double standard_error(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> x, double p);

double normal_cdf(double x);
double normal_pdf(double x);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
/// Ordinary least squares y = slope*x + intercept (needs two distinct x values).
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace mixsde::stats
