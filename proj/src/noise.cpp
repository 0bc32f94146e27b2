#include "mixsde/noise.hpp"

#include <cmath>

#include "mixsde/error.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

Hurst::Hurst(double h) : h_(h) {
    if (!(h >= 0.5 && h < 1.0)) throw Error("Hurst index must lie in [1/2, 1), got " + format_double(h));
}

double fbm_covariance(double t, double s, Hurst H) {
    if (t < 0.0 || s < 0.0) throw Error("fBm covariance needs nonnegative times");
    const double a = 2.0 * H.value();
    return 0.5 * (std::pow(t, a) + std::pow(s, a) - std::pow(std::abs(t - s), a));
}

double phi_kernel(double t, double s, Hurst H) {
    if (t == s) throw Error("phi kernel is singular on the diagonal");
    const double h = H.value();
    return h * (2.0 * h - 1.0) * std::pow(std::abs(t - s), 2.0 * h - 2.0);
}

double fgn_autocovariance(std::size_t lag, Hurst H) {
    const double a = 2.0 * H.value();
    const double k = static_cast<double>(lag);
    if (lag == 0) return 1.0;
    return 0.5 * (std::pow(k + 1.0, a) - 2.0 * std::pow(k, a) + std::pow(k - 1.0, a));
}

SamplePath sample_wiener(const TimeGrid& grid, std::size_t components, Rng& rng) {
    SamplePath W(grid, components);
    const double sd = std::sqrt(grid.step());
    for (std::size_t c = 0; c < components; ++c) {
        double level = 0.0;
        for (std::size_t k = 1; k < grid.points(); ++k) {
            level += sd * rng.normal();
            W(k, c) = level;
        }
    }
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < components; ++c) labels.push_back("W" + std::to_string(c + 1));
    return SamplePath(grid, std::move(W.values()), std::move(labels));
}

FbmGenerator::FbmGenerator(const TimeGrid& grid, Hurst H, FbmMethod method, bool allow_fallback)
    : grid_(grid), hurst_(H), method_(method) {
    const std::size_t n = grid.steps();
    if (method_ == FbmMethod::Circulant) {
        const std::size_t N = 2 * n;
        std::vector<double> row(N, 0.0);
        for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(k, H);
        for (std::size_t k = 1; k < n; ++k) row[N - k] = row[k];
        auto fft = std::make_shared<RealFft>(N);
        auto spectrum = fft->forward(row);
        double largest = 0.0;
        for (const auto& v : spectrum) largest = std::max(largest, v.real());
        bool negative = false;
        sqrt_eigenvalues_.resize(spectrum.size());
        for (std::size_t k = 0; k < spectrum.size(); ++k) {
            double lambda = spectrum[k].real();
            if (lambda < 0.0) {
                if (lambda < -1e-10 * largest) negative = true;
                lambda = 0.0;
            }
            sqrt_eigenvalues_[k] = std::sqrt(lambda);
        }
        if (!negative) {
            fft_ = std::move(fft);
            return;
        }
        if (!allow_fallback) throw Error("circulant embedding has a negative eigenvalue");
        sqrt_eigenvalues_.clear();
        method_ = FbmMethod::Cholesky;
    }
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                fgn_autocovariance(i > j ? i - j : j - i, H);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw Error("fGn covariance is not positive definite");
    cholesky_ = llt.matrixL();
}

std::vector<double> FbmGenerator::sample_increments(Rng& rng) const {
    const std::size_t n = grid_.steps();
    std::vector<double> out(n);
    if (method_ == FbmMethod::Circulant) {
        // Hermitian half-spectrum a_k with E|a_k|^2 = lambda_k; the backward
        // transform divided by sqrt(N) has circulant covariance.
        const std::size_t N = 2 * n;
        std::vector<std::complex<double>> half(n + 1);
        half[0] = sqrt_eigenvalues_[0] * rng.normal();
        for (std::size_t k = 1; k < n; ++k) {
            const double re = rng.normal();
            const double im = rng.normal();
            half[k] = sqrt_eigenvalues_[k] * std::sqrt(0.5) * std::complex<double>(re, im);
        }
        half[n] = sqrt_eigenvalues_[n] * rng.normal();
        auto full = fft_->backward(half);
        const double scale = 1.0 / std::sqrt(static_cast<double>(N));
        for (std::size_t k = 0; k < n; ++k) out[k] = full[k] * scale;
    } else {
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) z(static_cast<Eigen::Index>(k)) = rng.normal();
        Eigen::VectorXd x = cholesky_.triangularView<Eigen::Lower>() * z;
        for (std::size_t k = 0; k < n; ++k) out[k] = x(static_cast<Eigen::Index>(k));
    }
    return out;
}

SamplePath FbmGenerator::sample(std::size_t components, Rng& rng) const {
    RowMatrix values = RowMatrix::Zero(static_cast<Eigen::Index>(grid_.points()), static_cast<Eigen::Index>(components));
    const double scale = std::pow(grid_.step(), hurst_.value());
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < components; ++c) {
        auto inc = sample_increments(rng);
        double level = 0.0;
        for (std::size_t k = 0; k < inc.size(); ++k) {
            level += scale * inc[k];
            values(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(c)) = level;
        }
        labels.push_back("B" + std::to_string(c + 1));
    }
    return SamplePath(grid_, std::move(values), std::move(labels));
}

SamplePath sample_fbm(const TimeGrid& grid, std::size_t components, Hurst H, Rng& rng, FbmMethod method) {
    return FbmGenerator(grid, H, method).sample(components, rng);
}

NoiseModel::NoiseModel(const TimeGrid& grid, std::size_t wiener_dim, std::size_t fbm_dim, Hurst H, FbmMethod method)
    : grid_(grid), m_(wiener_dim), l_(fbm_dim), hurst_(H) {
    if (l_ > 0) fbm_ = std::make_shared<FbmGenerator>(grid, H, method);
}

NoiseBundle NoiseModel::draw(std::uint64_t master_seed, std::uint64_t path) const {
    Rng wiener_rng(master_seed, path, Stream::Wiener);
    Rng fbm_rng(master_seed, path, Stream::Fractional);
    SamplePath W = sample_wiener(grid_, m_, wiener_rng);
    SamplePath B = l_ > 0 ? fbm_->sample(l_, fbm_rng) : SamplePath(grid_, 0);
    return NoiseBundle{std::move(W), std::move(B), master_seed, path, hurst_};
}

NoiseBundle restrict_noise(const NoiseBundle& noise, std::size_t stride) {
    return NoiseBundle{restrict_path(noise.W, stride), restrict_path(noise.B, stride), noise.seed, noise.path, noise.H};
}

}  // namespace mixsde
