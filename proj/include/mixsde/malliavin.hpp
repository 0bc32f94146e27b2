#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/fft.hpp"
#include "mixsde/fields.hpp"
#include "mixsde/flow.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/paths.hpp"

namespace mixsde {

/// Cell integrals of phi_H over grid cells,
///   W_ij = (|t_{i+1}-t_j|^{2H} + |t_i-t_{j+1}|^{2H} - |t_i-t_j|^{2H} - |t_{i+1}-t_{j+1}|^{2H}) / 2,
/// so that sum_{i,j} f_i g_j W_ij is exact for piecewise-constant f, g. On a uniform grid
/// W_ij depends on |i-j| only and products are evaluated with an FFT Toeplitz operator.
class KernelWeights {
public:
    KernelWeights(const TimeGrid& grid, Hurst H);

    const TimeGrid& grid() const noexcept { return grid_; }
    Hurst hurst() const noexcept { return hurst_; }

    double weight(std::size_t i, std::size_t j) const { return lag_weights_.at(i > j ? i - j : j - i); }
    /// sum_{i,j < cells} W_ij (equals t^{2H} with t = cells * step).
    double total(std::size_t cells) const;

    /// sum_{i,j} f_i g_j W_ij over the first f.size() cells (f, g same length <= n).
    double bilinear(std::span<const double> f, std::span<const double> g) const;

    const ToeplitzOperator& toeplitz() const noexcept { return *toeplitz_; }

private:
    TimeGrid grid_;
    Hurst hurst_;
    std::vector<double> lag_weights_;
    std::shared_ptr<const ToeplitzOperator> toeplitz_;
};

/// <f, g> in L^2_H[0,T] for scalar paths, using left-point values on each cell.
double lh2_inner(const SamplePath& f, const SamplePath& g, Hurst H);
double lh2_inner(const SamplePath& f, const SamplePath& g, const KernelWeights& weights);

/// D_s X_{t_j} = J_{t_j,s} v(s, X_s) 1_{s <= t_j}, with v the b- or c-column given by
/// `direction` (kind Wiener or Fractional).
SamplePath malliavin_derivative(const CoefficientSystem& sys, const SamplePath& X, const FlowPair& flow,
                                std::size_t s_index, FieldRef direction);

struct MalliavinMatrix {
    double t = 0.0;
    Eigen::MatrixXd M;               ///< covariance matrix M(t)
    Eigen::MatrixXd C;               ///< reduced matrix C(t), M = J C J'
    Eigen::VectorXd eigenvalues_M;   ///< ascending
    Eigen::VectorXd eigenvalues_C;   ///< ascending
    double det_M = 0.0;
    double det_C = 0.0;
    double consistency = 0.0;        ///< ||M - J_t C J_t'||_F / ||M||_F
    double asymmetry = 0.0;          ///< max |A - A'| before symmetrization, over M and C
};

/// Assembles M(t_index) with J_{t,s} = J_t J_s^{-1} (numerical inverse) and C(t_index) with
/// the solved inverse flow Z_s, so the consistency residual compares both routes.
MalliavinMatrix covariance_matrix(const CoefficientSystem& sys, const SamplePath& X, const FlowPair& flow,
                                  std::size_t t_index, const KernelWeights& weights);

struct SpectrumConfig {
    std::shared_ptr<const CoefficientSystem> system;
    Eigen::VectorXd x0;
    TimeGrid grid{1.0, 1024};
    Hurst H{0.75};
    std::uint64_t seed = 0;
    double t = 1.0;
    std::vector<double> eps_grid;  ///< empty selects 10^-12 .. 10^2, two points per decade
};

struct SpectrumSample {
    std::uint64_t path = 0;
    double lambda_min_C = 0.0;
    double lambda_min_M = 0.0;
    double det_M = 0.0;
    double det_C = 0.0;
    double consistency = 0.0;
};

struct SpectrumSummary {
    std::vector<SpectrumSample> samples;
    std::vector<double> probabilities;      ///< quantile levels
    std::vector<double> lambda_quantiles;   ///< quantiles of lambda_min(C)
    std::vector<double> det_M_quantiles;
    std::vector<double> eps_grid;
    std::vector<double> frequency;          ///< frequency{lambda_min(C) <= eps}
};

/// Monte Carlo law of lambda_min(C(t)) and det M(t) over N >= 100 trajectories.
SpectrumSummary spectrum_ensemble(const SpectrumConfig& config, std::size_t paths);

}  // namespace mixsde
