#pragma once

#include <Eigen/Dense>

#include "mixsde/fields.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/paths.hpp"

namespace mixsde {

/// Explicit left-point Euler scheme
///   X_{k+1} = X_k + a(t_k,X_k) dt + b(t_k,X_k) dW_k + c(t_k,X_k) dB_k.
/// Left-point evaluation gives the Ito sum for W and the Young sum for B (H > 1/2).
/// Throws SolverError with the step index if the state stops being finite.
SamplePath solve_mixed_euler(const CoefficientSystem& sys, const Eigen::VectorXd& x0, const NoiseBundle& noise);

/// Left-point Riemann-Stieltjes sum sum_k f(t_k) (g(t_{k+1}) - g(t_k)) for scalar paths.
double young_integral(const SamplePath& f, const SamplePath& g);

/// Left-point (Ito) sum; the integrand must be adapted, which is the caller's contract.
double ito_integral(const SamplePath& f, const SamplePath& w);

}  // namespace mixsde
