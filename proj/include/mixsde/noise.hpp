#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "mixsde/fft.hpp"
#include "mixsde/paths.hpp"
#include "mixsde/rng.hpp"

namespace mixsde {

/// Hurst index of the fractional Brownian motion, 1/2 <= H < 1.
/// H = 1/2 is admitted as the Brownian limit for generator checks only.
class Hurst {
public:
    explicit Hurst(double h);
    double value() const noexcept { return h_; }
    bool operator==(const Hurst&) const = default;

private:
    double h_;
};

/// (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double t, double s, Hurst H);

/// H(2H-1)|t-s|^{2H-2}; throws for t == s where the kernel is singular.
double phi_kernel(double t, double s, Hurst H);

/// Covariance of unit-step fractional Gaussian noise at integer lag k.
double fgn_autocovariance(std::size_t lag, Hurst H);

/// m independent Wiener components on `grid`, starting at 0.
SamplePath sample_wiener(const TimeGrid& grid, std::size_t components, Rng& rng);

enum class FbmMethod {
    Circulant,  ///< exact circulant embedding, O(n log n)
    Cholesky,   ///< Cholesky factor of the full increment covariance, O(n^3) setup
};

/// Exact-in-law fBm sampler for a fixed grid and Hurst index. Setup is done once;
/// sample() is const and safe to call concurrently.
class FbmGenerator {
public:
    FbmGenerator(const TimeGrid& grid, Hurst H, FbmMethod method = FbmMethod::Circulant,
                 bool allow_fallback = true);

    const TimeGrid& grid() const noexcept { return grid_; }
    Hurst hurst() const noexcept { return hurst_; }
    /// The method actually in use (Cholesky after a fallback).
    FbmMethod method() const noexcept { return method_; }

    SamplePath sample(std::size_t components, Rng& rng) const;

private:
    std::vector<double> sample_increments(Rng& rng) const;

    TimeGrid grid_;
    Hurst hurst_;
    FbmMethod method_;
    std::shared_ptr<const RealFft> fft_;
    std::vector<double> sqrt_eigenvalues_;
    Eigen::MatrixXd cholesky_;
};

SamplePath sample_fbm(const TimeGrid& grid, std::size_t components, Hurst H, Rng& rng,
                      FbmMethod method = FbmMethod::Circulant);

/// Driving noise of one trajectory.
struct NoiseBundle {
    SamplePath W;
    SamplePath B;
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
    Hurst H{0.75};

    const TimeGrid& grid() const noexcept { return W.grid(); }
};

/// Draws NoiseBundles for path indices of an ensemble. W and B use disjoint
/// streams derived from (master seed, path index).
class NoiseModel {
public:
    NoiseModel(const TimeGrid& grid, std::size_t wiener_dim, std::size_t fbm_dim, Hurst H,
               FbmMethod method = FbmMethod::Circulant);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t wiener_dim() const noexcept { return m_; }
    std::size_t fbm_dim() const noexcept { return l_; }
    Hurst hurst() const noexcept { return hurst_; }

    NoiseBundle draw(std::uint64_t master_seed, std::uint64_t path) const;

private:
    TimeGrid grid_;
    std::size_t m_;
    std::size_t l_;
    Hurst hurst_;
    std::shared_ptr<const FbmGenerator> fbm_;
};

/// Restricts both noise paths to every `stride`-th grid point.
NoiseBundle restrict_noise(const NoiseBundle& noise, std::size_t stride);

}  // namespace mixsde
