#pragma once

// Two-scale partition statistics on [0,1]: coarse blocks of length Delta = 1/M, each split
// into r fine steps of length delta = Delta/r.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/fields.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/paths.hpp"

namespace mixsde {

/// (H - 1/2) / (3 - 4H): the lower end of the admissible Hoelder exponents.
double theta_star(double H);

class NorrisPartition {
public:
    NorrisPartition(std::size_t blocks, std::size_t fine_steps);

    std::size_t blocks() const noexcept { return blocks_; }
    std::size_t fine_steps() const noexcept { return fine_steps_; }
    double coarse() const noexcept { return 1.0 / static_cast<double>(blocks_); }
    double fine() const noexcept { return coarse() / static_cast<double>(fine_steps_); }
    std::size_t fine_points() const noexcept { return blocks_ * fine_steps_; }

    /// Grid index stride mapping fine point t_n to a path grid; throws unless the grid
    /// has T = 1 and refines the partition.
    std::size_t stride(const TimeGrid& grid) const;

private:
    std::size_t blocks_;
    std::size_t fine_steps_;
};

/// V_N(xi, zeta) = sum_{n=Nr}^{(N+1)r-1} (xi_{t_{n+1}} - xi_{t_n}) (zeta_{t_{n+1}} - zeta_{t_n}).
double quadratic_covariation(const SamplePath& xi, const SamplePath& zeta, std::size_t block,
                             const NorrisPartition& partition);

struct RStatistics {
    double wiener = 0.0;      ///< R^W
    double fractional = 0.0;  ///< R^B
    double mixed = 0.0;       ///< R^{W,B}
};

/// R^W  = Delta^{3/4} delta^{-1/4} sum_N sum_{u,v} | Delta^{1/2} 1{u=v} - |V_N(W^u,W^v)|^{1/2} |
/// R^B  = Delta^{H-3/2} delta^{1/2} sum_N sum_{u,v} | Delta^{1/2} delta^{H-1/2} 1{u=v} - |V_N(B^u,B^v)|^{1/2} |
/// R^WB = Delta^{3/4} delta^{-H/2} sum_N sum_{u,v} |V_N(W^u,B^v)|^{1/2}
RStatistics r_statistics(const SamplePath& W, const SamplePath& B, const NorrisPartition& partition, Hurst H);

struct TailFit {
    std::vector<double> h;
    std::vector<double> frequency;         ///< frequency{sample >= h}
    std::vector<std::size_t> exceedances;  ///< count{sample >= h}
    std::size_t bins_used = 0;             ///< bins with >= 10 exceedances and nonzero frequency
    bool fitted = false;
    double slope = 0.0;                    ///< of log frequency against h^2
    double intercept = 0.0;
};

/// Empirical tail h -> frequency{sample >= h} and a least-squares fit of log frequency
/// against h^2 over bins with at least 10 exceedances. Needs >= 100 non-constant samples.
TailFit concentration_tail(std::span<const double> samples, std::span<const double> h_grid);

/// Evenly spaced h grid from the median to the maximum of the samples.
std::vector<double> tail_grid(std::span<const double> samples, std::size_t points = 20);

struct NorrisConfig {
    std::shared_ptr<const CoefficientSystem> system;
    Eigen::VectorXd x0;
    std::size_t blocks = 16;      ///< M
    std::size_t fine_steps = 16;  ///< r
    std::size_t oversample = 4;   ///< path grid has M*r*oversample steps on [0,1]
    Hurst H{0.6};
    double theta = 0.3;
    std::uint64_t seed = 0;
};

struct NorrisTrial {
    std::uint64_t path = 0;
    double sup_Y = 0.0;
    double sup_b = 0.0;  ///< sup_t |b(X_t)| (Frobenius)
    double sup_c = 0.0;
    RStatistics R;
};

/// Advisory messages for (H, theta) outside 1/2 < H < 2/3, theta_* < theta < 1/2.
std::vector<std::string> norris_warnings(double H, double theta);

/// Solves the system on N independent noise draws and records the sup norms and R statistics.
std::vector<NorrisTrial> norris_trials(const NorrisConfig& config, std::size_t trials);

/// Frequency of {||Y||_inf < eps and ||b||_inf + ||c||_inf > eps^q}.
double norris_frequency(std::span<const NorrisTrial> trials, double eps, double q);

double norris_experiment(const NorrisConfig& config, double eps, double q, std::size_t trials);

}  // namespace mixsde
