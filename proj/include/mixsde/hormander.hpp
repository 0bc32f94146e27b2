#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/expr.hpp"
#include "mixsde/fields.hpp"

namespace mixsde {

using VectorField = std::vector<Expr>;

/// [V, W](x) = dW(x) V(x) - dV(x) W(x), computed symbolically.
VectorField lie_bracket(const VectorField& V, const VectorField& W);

Eigen::VectorXd evaluate_field(const VectorField& V, std::span<const double> x);

/// A field of the bracket hierarchy. `word` = (i_1, ..., i_k) stands for
/// [V_{i_1}, [V_{i_2}, ... [V_{i_{k-1}}, V_{i_k}] ...]], indices into VectorFieldSet::fields
/// (0 is the drift).
struct BracketNode {
    VectorField field;
    std::vector<std::size_t> word;
    std::size_t level = 1;
    Eigen::VectorXd value_at_x0;
};

struct HierarchyOptions {
    std::size_t max_level = 3;
    bool include_drift = false;
    std::size_t max_nodes = 10000;
};

/// Breadth-first hierarchy: level 1 holds V_1..V_{m+l}; level k brackets every base field
/// (V_0 too when include_drift) with every level-(k-1) node. Throws when the node budget
/// would be exceeded.
std::vector<BracketNode> bracket_hierarchy(const VectorFieldSet& fields, std::span<const double> x0,
                                           const HierarchyOptions& options);

struct RankDecision {
    std::size_t rank = 0;
    std::vector<double> singular_values;  ///< descending
    bool satisfied = false;
    std::optional<std::size_t> achieved_level;
    double tolerance = 1e-8;
};

/// Numerical rank of the columns of `vectors` with relative threshold tol * sigma_max.
RankDecision rank_decision(const Eigen::MatrixXd& vectors, double tol);

/// span{b_{.,j}(t0,x0), c_{.,k}(t0,x0)} = R^d.
RankDecision check_simplified(const CoefficientSystem& sys, std::span<const double> x0, double t0 = 0.0,
                              double tol = 1e-8);

/// Strong condition: rank of all bracket values up to level n0, adding one level at a time.
/// achieved_level is the first level at which the rank reaches d.
RankDecision check_strong(const VectorFieldSet& fields, std::span<const double> x0, std::size_t n0,
                          double tol = 1e-8, bool include_drift = false, std::size_t max_nodes = 10000);

}  // namespace mixsde
