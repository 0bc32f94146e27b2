#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/fields.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/paths.hpp"

namespace mixsde {

using MatrixPath = std::vector<Eigen::MatrixXd>;

/// Jacobian flow J_{t_k,0} and its inverse Z_{t_k,0} along one trajectory.
struct FlowPair {
    MatrixPath J;
    MatrixPath Z;
    std::vector<double> residuals;  ///< ||Z_k J_k - I||_F per grid point
    double residual = 0.0;          ///< max over the grid

    std::size_t steps() const noexcept { return J.empty() ? 0 : J.size() - 1; }
};

/// Euler scheme for dJ = (da) J dt + sum_k (db_k) J dW^k + sum_q (dc_q) J dB^q, J_0 = I,
/// with Jacobians evaluated at (t_k, X_k).
MatrixPath solve_jacobian(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise);

/// Euler scheme for the inverse flow
///   dZ = Z (-(da) + sum_k (db_k)^2) dt - sum_k Z (db_k) dW^k - sum_q Z (dc_q) dB^q,  Z_0 = I,
/// the system forced by d(ZJ) = 0. Only the Wiener part carries a correction term.
MatrixPath solve_inverse(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise);

/// Both flows in one pass plus the product residual.
FlowPair solve_flow(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise);

/// J_{t,s} = J_{t,0} Z_{s,0}.
Eigen::MatrixXd transition(const MatrixPath& J, const MatrixPath& Z, std::size_t s_index, std::size_t t_index);

}  // namespace mixsde
