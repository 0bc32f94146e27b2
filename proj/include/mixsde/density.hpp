#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/fields.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/paths.hpp"
#include "mixsde/stats.hpp"

namespace mixsde {

/// Everything needed to draw independent trajectories of one SDE.
struct EnsembleConfig {
    std::shared_ptr<const CoefficientSystem> system;
    Eigen::VectorXd x0;
    TimeGrid grid{1.0, 1024};
    Hurst H{0.75};
    std::uint64_t seed = 0;

    /// Hash of the system, x0, grid, H and seed.
    std::string fingerprint() const;
};

/// N samples of X_t (one row each).
struct Ensemble {
    RowMatrix samples;
    double t = 0.0;
    std::string fingerprint;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> path_ids;

    std::size_t size() const noexcept { return static_cast<std::size_t>(samples.rows()); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(samples.cols()); }
    std::vector<double> column(std::size_t c) const;

    /// Wraps externally generated samples (used for synthetic checks).
    static Ensemble from_samples(RowMatrix samples);
};

/// N independent solves; path p uses noise streams derived from (seed, p).
Ensemble run_ensemble(const EnsembleConfig& config, double t, std::size_t paths);

struct DensityTable {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;
    double mass = 0.0;  ///< trapezoid integral of the estimate
};

/// Silverman's rule 0.9 min(sd, IQR/1.34) N^{-1/5}.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian-kernel estimate on 512 points spanning the sample range +- 3 bandwidths.
DensityTable kde(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt);
DensityTable kde(const Ensemble& ensemble, std::size_t component, std::optional<double> bandwidth = std::nullopt);

struct GaussianReport {
    std::vector<stats::KsResult> components;  ///< after whitening with the target covariance
    double level = 0.01;
    double threshold = 0.01;                  ///< Bonferroni-corrected per-component level
    bool pass = false;
};

/// KS tests of L^{-1}(X - mean) against N(0,1) per component, cov = L L'.
GaussianReport gaussian_check(const Ensemble& ensemble, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                              double level = 0.01);

struct SmallBallRow {
    double radius = 0.0;
    double frequency = 0.0;  ///< frequency{|X - center| <= r}
    double ratio = 0.0;      ///< frequency / r^d
};

std::vector<SmallBallRow> small_ball_probe(const Ensemble& ensemble, const Eigen::VectorXd& center,
                                           std::span<const double> radii);

struct IntegrabilityExponents {
    double H = 0.0;
    double theta = 0.0;
    double q_star = 0.0;      ///< min(4H/(2(H+theta)+1), (2H+1)/(4H))
    double theta_star = 0.0;  ///< (H-1/2)/(3-4H)

    static IntegrabilityExponents compute(double H, double theta);
};

struct IntegrabilityCell {
    double K = 0.0;
    double q = 0.0;
    double estimate_N = 0.0;   ///< mean of exp(K ||X||_theta^q) over the first N paths
    double estimate_2N = 0.0;  ///< same over 2N paths
    double ratio = 0.0;        ///< estimate_2N / estimate_N
    bool overflow = false;
};

struct IntegrabilityTable {
    IntegrabilityExponents exponents;
    std::size_t paths = 0;
    std::vector<double> seminorms;  ///< ||X||_theta of all 2N paths
    std::vector<IntegrabilityCell> cells;
};

/// Monte Carlo E[exp(K ||X||_theta^q)] at N and 2N paths for every (K, q).
IntegrabilityTable holder_integrability_study(const EnsembleConfig& config, double theta,
                                              std::span<const double> K_grid, std::span<const double> q_grid,
                                              std::size_t paths);

}  // namespace mixsde
