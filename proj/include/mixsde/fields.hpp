#pragma once

// Coefficient system (a, b, c) of
//   dX = a(t,X) dt + b(t,X) dW + c(t,X) dB^H
// with exact symbolic Jacobians.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/expr.hpp"
#include "mixsde/rng.hpp"

namespace mixsde {

enum class FieldKind { Drift, Wiener, Fractional };

/// Selects a, a column of b, or a column of c.
struct FieldRef {
    FieldKind kind = FieldKind::Drift;
    std::size_t column = 0;
};

/// Vector fields V_0 = a, V_j = b_{.,j} (j = 1..m), V_{m+j} = c_{.,j} (j = 1..l).
struct VectorFieldSet {
    std::size_t dimension = 0;
    std::size_t wiener = 0;
    std::size_t fractional = 0;
    std::vector<std::vector<Expr>> fields;

    /// Number of diffusion fields m + l.
    std::size_t diffusion_count() const noexcept { return wiener + fractional; }
};

class CoefficientSystem {
public:
    /// `b` and `c` are row-major (entry (i, k) at i*m + k).
    CoefficientSystem(std::size_t d, std::size_t m, std::size_t l, std::vector<Expr> a, std::vector<Expr> b,
                      std::vector<Expr> c, bool time_dependent = false);

    static CoefficientSystem parse(std::size_t d, std::size_t m, std::size_t l, const std::vector<std::string>& a,
                                   const std::vector<std::string>& b, const std::vector<std::string>& c,
                                   bool time_dependent = false);

    std::size_t d() const noexcept { return d_; }
    std::size_t m() const noexcept { return m_; }
    std::size_t l() const noexcept { return l_; }
    bool time_dependent() const noexcept { return time_dependent_; }

    const Expr& drift(std::size_t i) const { return a_.at(i); }
    const Expr& wiener(std::size_t i, std::size_t k) const { return b_.at(i * m_ + k); }
    const Expr& fractional(std::size_t i, std::size_t q) const { return c_.at(i * l_ + q); }

    /// Expressions of one field as a d-vector.
    std::vector<Expr> field(FieldRef which) const;

    Eigen::VectorXd eval_field(FieldRef which, double t, std::span<const double> x) const;
    Eigen::MatrixXd jacobian(FieldRef which, double t, std::span<const double> x) const;

    // In-place variants for the solvers; outputs must be pre-sized.
    void eval_drift(double t, std::span<const double> x, Eigen::Ref<Eigen::VectorXd> out) const;
    void eval_wiener(double t, std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) const;
    void eval_fractional(double t, std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) const;
    void eval_jacobian(FieldRef which, double t, std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) const;

    /// True when every derivative of the field is identically zero (after folding).
    bool has_constant_field(FieldRef which) const;

    /// Requires an autonomous system.
    VectorFieldSet vector_fields() const;

    /// "a1 = ...", "b1_1 = ...", ... one line per entry.
    std::vector<std::string> describe() const;

private:
    struct Derivative {
        std::size_t row;
        std::size_t var;
        Expr expr;
    };
    const std::vector<Derivative>& derivatives(FieldRef which) const;

    std::size_t d_, m_, l_;
    bool time_dependent_;
    std::vector<Expr> a_, b_, c_;
    // Non-zero entries of each field's Jacobian: [0] drift, [1..m] b columns, [m+1..] c columns.
    std::vector<std::vector<Derivative>> jac_;
};

Eigen::VectorXd eval_field(const CoefficientSystem& sys, FieldRef which, double t, std::span<const double> x);
Eigen::MatrixXd jacobian(const CoefficientSystem& sys, FieldRef which, double t, std::span<const double> x);

using PresetParams = std::map<std::string, double>;

/// Built-in systems: "additive", "geometric", "heisenberg", "degenerate", "bounded-smooth".
/// Parameters (all optional):
///   additive:  d (1), sigma (1), gamma (1)      a = 0, b = sigma I, c = gamma I
///   geometric: mu (0), sigma (1), gamma (0)     a = mu x, b = sigma x, c = gamma x
CoefficientSystem preset(const std::string& name, const PresetParams& params = {});
std::vector<std::string> preset_names();

/// Bound on |field| and |jacobian| declared for the "bounded-smooth" preset.
inline constexpr double kBoundedSmoothBound = 2.0;

/// Advisory numeric checks of the coefficient assumptions.
struct AssumptionReport {
    double field_sup = 0.0;        ///< max Euclidean norm of a, b, c over sampled points
    double jacobian_sup = 0.0;     ///< max spectral norm of any field Jacobian
    double growth_constant = 0.0;  ///< max (|a|+|b|+|c|)/(1+|x|)
    double time_holder = 0.0;      ///< max |f(t',x)-f(t,x)| / (|t'-t|^beta (1+|x|)), 0 if autonomous
    std::vector<std::string> warnings;
};

/// Samples `points` states uniformly in [-radius, radius]^d and times in [0, horizon].
AssumptionReport check_assumptions(const CoefficientSystem& sys, std::size_t points, double radius, double horizon,
                                   Rng& rng, double beta = 0.5);

}  // namespace mixsde
