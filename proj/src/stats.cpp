#include "mixsde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixsde/error.hpp"

namespace mixsde::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw Error("mean of an empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw Error("variance needs two samples");
    const double mu = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return s / static_cast<double>(x.size() - 1);
}

double standard_error(std::span<const double> x) { return std::sqrt(variance(x) / static_cast<double>(x.size())); }

double covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("covariance needs two paired samples");
    const double mx = mean(x), my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw Error("quantile of an empty sample");
    std::sort(x.begin(), x.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, x.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return x[lo] + frac * (x[hi] - x[lo]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {
// Stephens' finite-sample correction of the asymptotic distribution.
double ks_p_value(double statistic, double effective_n) {
    const double root = std::sqrt(effective_n);
    return kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic);
}
}  // namespace

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error("KS test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, ks_p_value(d, n)};
}

KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("KS test needs samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, ks_p_value(d, na * nb / (na + nb))};
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("least squares needs two points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error("least squares needs distinct abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace mixsde::stats
