#include "mixsde/flow.hpp"

#include "mixsde/error.hpp"

namespace mixsde {

namespace {

enum class Which { Forward, Inverse, Both };

// Jacobians of every field at (t_k, X_k).
struct Linearization {
    Eigen::MatrixXd drift;
    std::vector<Eigen::MatrixXd> wiener;
    std::vector<Eigen::MatrixXd> fractional;
};

void check_inputs(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise) {
    if (!(X.grid() == noise.W.grid()) || !(X.grid() == noise.B.grid()))
        throw Error("trajectory and noise live on different grids");
    if (X.dimension() != sys.d()) throw Error("trajectory dimension does not match the system");
    if (noise.W.dimension() != sys.m() || noise.B.dimension() != sys.l())
        throw Error("noise dimensions do not match the coefficient system");
}

void run(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise, Which which, MatrixPath* J,
         MatrixPath* Z) {
    check_inputs(sys, X, noise);
    const auto d = static_cast<Eigen::Index>(sys.d());
    const std::size_t m = sys.m(), l = sys.l();
    const TimeGrid& grid = X.grid();
    const double h = grid.step();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

    Linearization lin{Eigen::MatrixXd(d, d), std::vector<Eigen::MatrixXd>(m, Eigen::MatrixXd(d, d)),
                      std::vector<Eigen::MatrixXd>(l, Eigen::MatrixXd(d, d))};
    const bool drift_const = sys.has_constant_field({FieldKind::Drift, 0});
    std::vector<bool> wiener_const(m), frac_const(l);
    for (std::size_t k = 0; k < m; ++k) wiener_const[k] = sys.has_constant_field({FieldKind::Wiener, k});
    for (std::size_t q = 0; q < l; ++q) frac_const[q] = sys.has_constant_field({FieldKind::Fractional, q});

    const bool forward = which != Which::Inverse;
    const bool inverse = which != Which::Forward;
    if (forward) {
        J->assign(grid.points(), I);
    }
    if (inverse) {
        Z->assign(grid.points(), I);
    }

    Eigen::MatrixXd gen(d, d), corr(d, d);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double t = grid.time(k);
        const Eigen::VectorXd xk = X.row(k).transpose();
        std::span<const double> state(xk.data(), static_cast<std::size_t>(d));

        // Forward generator G with J_{k+1} = (I + G) J_k, inverse Z_{k+1} = Z_k (I - G + corr dt).
        gen.setZero();
        corr.setZero();
        if (!drift_const) {
            sys.eval_jacobian({FieldKind::Drift, 0}, t, state, lin.drift);
            gen.noalias() += lin.drift * h;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (wiener_const[j]) continue;
            sys.eval_jacobian({FieldKind::Wiener, j}, t, state, lin.wiener[j]);
            const double dw = noise.W(k + 1, j) - noise.W(k, j);
            gen.noalias() += lin.wiener[j] * dw;
            corr.noalias() += lin.wiener[j] * lin.wiener[j];
        }
        for (std::size_t q = 0; q < l; ++q) {
            if (frac_const[q]) continue;
            sys.eval_jacobian({FieldKind::Fractional, q}, t, state, lin.fractional[q]);
            const double db = noise.B(k + 1, q) - noise.B(k, q);
            gen.noalias() += lin.fractional[q] * db;
        }
        if (forward) {
            (*J)[k + 1] = (*J)[k] + gen * (*J)[k];
            if (!(*J)[k + 1].allFinite()) throw SolverError("non-finite Jacobian flow", k + 1);
        }
        if (inverse) {
            (*Z)[k + 1] = (*Z)[k] - (*Z)[k] * gen + ((*Z)[k] * corr) * h;
            if (!(*Z)[k + 1].allFinite()) throw SolverError("non-finite inverse flow", k + 1);
        }
    }
}

}  // namespace

MatrixPath solve_jacobian(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise) {
    MatrixPath J;
    run(sys, X, noise, Which::Forward, &J, nullptr);
    return J;
}

MatrixPath solve_inverse(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise) {
    MatrixPath Z;
    run(sys, X, noise, Which::Inverse, nullptr, &Z);
    return Z;
}

FlowPair solve_flow(const CoefficientSystem& sys, const SamplePath& X, const NoiseBundle& noise) {
    FlowPair flow;
    run(sys, X, noise, Which::Both, &flow.J, &flow.Z);
    const auto d = static_cast<Eigen::Index>(sys.d());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    flow.residuals.resize(flow.J.size());
    for (std::size_t k = 0; k < flow.J.size(); ++k) {
        flow.residuals[k] = (flow.Z[k] * flow.J[k] - I).norm();
        flow.residual = std::max(flow.residual, flow.residuals[k]);
    }
    return flow;
}

Eigen::MatrixXd transition(const MatrixPath& J, const MatrixPath& Z, std::size_t s_index, std::size_t t_index) {
    if (s_index > t_index) throw Error("transition needs s <= t");
    if (t_index >= J.size() || s_index >= Z.size()) throw Error("transition index out of range");
    return J[t_index] * Z[s_index];
}

}  // namespace mixsde
