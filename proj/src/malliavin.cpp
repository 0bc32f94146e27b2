#include "mixsde/malliavin.hpp"

#include <cmath>

#include "mixsde/error.hpp"
#include "mixsde/sde.hpp"
#include "mixsde/stats.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

KernelWeights::KernelWeights(const TimeGrid& grid, Hurst H) : grid_(grid), hurst_(H) {
    const std::size_t n = grid.steps();
    const double scale = std::pow(grid.step(), 2.0 * H.value());
    lag_weights_.resize(n);
    for (std::size_t k = 0; k < n; ++k) lag_weights_[k] = scale * fgn_autocovariance(k, H);
    toeplitz_ = std::make_shared<ToeplitzOperator>(lag_weights_);
}

double KernelWeights::total(std::size_t cells) const {
    if (cells > grid_.steps()) throw Error("more cells than the grid has");
    if (cells == 0) return 0.0;
    double s = static_cast<double>(cells) * lag_weights_[0];
    for (std::size_t k = 1; k < cells; ++k) s += 2.0 * static_cast<double>(cells - k) * lag_weights_[k];
    return s;
}

double KernelWeights::bilinear(std::span<const double> f, std::span<const double> g) const {
    if (f.size() != g.size() || f.size() > grid_.steps()) throw Error("kernel operands have wrong length");
    const std::size_t n = grid_.steps();
    if (f.size() <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j) s += f[i] * g[j] * weight(i, j);
        return s;
    }
    std::vector<double> fp(n, 0.0), gp(n, 0.0);
    std::copy(f.begin(), f.end(), fp.begin());
    std::copy(g.begin(), g.end(), gp.begin());
    return toeplitz_->bilinear(fp, gp);
}

namespace {

std::vector<double> left_points(const SamplePath& p) {
    if (p.dimension() != 1) throw Error("scalar path required");
    std::vector<double> v(p.grid().steps());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = p(k, 0);
    return v;
}

}  // namespace

double lh2_inner(const SamplePath& f, const SamplePath& g, const KernelWeights& weights) {
    if (!(f.grid() == g.grid()) || !(f.grid() == weights.grid())) throw Error("paths live on different grids");
    return weights.bilinear(left_points(f), left_points(g));
}

double lh2_inner(const SamplePath& f, const SamplePath& g, Hurst H) {
    return lh2_inner(f, g, KernelWeights(f.grid(), H));
}

SamplePath malliavin_derivative(const CoefficientSystem& sys, const SamplePath& X, const FlowPair& flow,
                                std::size_t s_index, FieldRef direction) {
    if (direction.kind == FieldKind::Drift) throw Error("Malliavin direction must be a Wiener or fBm column");
    if (s_index >= X.grid().points() || flow.J.size() != X.grid().points()) throw Error("index out of range");
    const Eigen::VectorXd xs = X.row(s_index).transpose();
    const Eigen::VectorXd column = sys.eval_field(direction, X.grid().time(s_index), {xs.data(), sys.d()});
    const Eigen::VectorXd pulled = flow.Z[s_index] * column;
    SamplePath D(X.grid(), sys.d());
    for (std::size_t j = s_index; j < X.grid().points(); ++j) D.row(j) = (flow.J[j] * pulled).transpose();
    return D;
}

namespace {

// sum_{i,j} W_ij u_i u_j' for vectors u_i stored as columns of `u` (d x cells).
Eigen::MatrixXd kernel_gram(const Eigen::MatrixXd& u, const KernelWeights& weights) {
    const Eigen::Index d = u.rows();
    const auto cells = static_cast<std::size_t>(u.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    if (cells == 0) return out;
    const std::size_t n = weights.grid().steps();
    std::vector<std::vector<double>> filtered(static_cast<std::size_t>(d));
    for (Eigen::Index r = 0; r < d; ++r) {
        std::vector<double> row(n, 0.0);
        for (std::size_t i = 0; i < cells; ++i) row[i] = u(r, static_cast<Eigen::Index>(i));
        filtered[static_cast<std::size_t>(r)] = weights.toeplitz().apply(row);
    }
    for (Eigen::Index s = 0; s < d; ++s)
        for (Eigen::Index r = 0; r < d; ++r) {
            const auto& tr = filtered[static_cast<std::size_t>(r)];
            double acc = 0.0;
            for (std::size_t i = 0; i < cells; ++i) acc += u(s, static_cast<Eigen::Index>(i)) * tr[i];
            out(s, r) = acc;
        }
    return out;
}

double asymmetry(const Eigen::MatrixXd& A) { return (A - A.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace

MalliavinMatrix covariance_matrix(const CoefficientSystem& sys, const SamplePath& X, const FlowPair& flow,
                                  std::size_t t_index, const KernelWeights& weights) {
    const TimeGrid& grid = X.grid();
    if (!(grid == weights.grid())) throw Error("kernel weights built for a different grid");
    if (t_index >= grid.points() || flow.J.size() != grid.points()) throw Error("time index out of range");
    const auto d = static_cast<Eigen::Index>(sys.d());
    const double h = grid.step();
    const std::size_t cells = t_index;

    MalliavinMatrix out;
    out.t = grid.time(t_index);
    out.M = Eigen::MatrixXd::Zero(d, d);
    out.C = Eigen::MatrixXd::Zero(d, d);
    const Eigen::MatrixXd& Jt = flow.J[t_index];

    std::vector<Eigen::MatrixXd> forward(cells);  // J_t J_s^{-1}
    for (std::size_t i = 0; i < cells; ++i) forward[i] = Jt * flow.J[i].partialPivLu().inverse();

    Eigen::MatrixXd b(d, static_cast<Eigen::Index>(sys.m())), c(d, static_cast<Eigen::Index>(sys.l()));
    std::vector<Eigen::MatrixXd> bvals(cells), cvals(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        std::span<const double> state(xi.data(), static_cast<std::size_t>(d));
        sys.eval_wiener(grid.time(i), state, b);
        sys.eval_fractional(grid.time(i), state, c);
        bvals[i] = b;
        cvals[i] = c;
    }

    for (std::size_t k = 0; k < sys.m(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        for (std::size_t i = 0; i < cells; ++i) {
            const Eigen::VectorXd v = forward[i] * bvals[i].col(col);
            const Eigen::VectorXd u = flow.Z[i] * bvals[i].col(col);
            out.M.noalias() += h * v * v.transpose();
            out.C.noalias() += h * u * u.transpose();
        }
    }
    for (std::size_t q = 0; q < sys.l(); ++q) {
        const auto col = static_cast<Eigen::Index>(q);
        Eigen::MatrixXd V(d, static_cast<Eigen::Index>(cells)), U(d, static_cast<Eigen::Index>(cells));
        for (std::size_t i = 0; i < cells; ++i) {
            V.col(static_cast<Eigen::Index>(i)) = forward[i] * cvals[i].col(col);
            U.col(static_cast<Eigen::Index>(i)) = flow.Z[i] * cvals[i].col(col);
        }
        out.M += kernel_gram(V, weights);
        out.C += kernel_gram(U, weights);
    }

    out.asymmetry = std::max(asymmetry(out.M), asymmetry(out.C));
    out.M = 0.5 * (out.M + out.M.transpose()).eval();
    out.C = 0.5 * (out.C + out.C.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_m(out.M, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_c(out.C, Eigen::EigenvaluesOnly);
    out.eigenvalues_M = eig_m.eigenvalues();
    out.eigenvalues_C = eig_c.eigenvalues();
    out.det_M = out.M.determinant();
    out.det_C = out.C.determinant();
    const double scale = out.M.norm();
    const Eigen::MatrixXd routed = Jt * out.C * Jt.transpose();
    out.consistency = scale > 0.0 ? (out.M - routed).norm() / scale : routed.norm();
    return out;
}

SpectrumSummary spectrum_ensemble(const SpectrumConfig& config, std::size_t paths) {
    if (paths < 100) throw Error("spectrum ensemble needs at least 100 paths");
    if (!config.system) throw Error("spectrum ensemble needs a coefficient system");
    const CoefficientSystem& sys = *config.system;
    const std::size_t t_index = config.grid.index_of(config.t);
    const NoiseModel model(config.grid, sys.m(), sys.l(), config.H);
    const KernelWeights weights(config.grid, config.H);

    SpectrumSummary summary;
    summary.samples.resize(paths);
    parallel_for(paths, [&](std::size_t p) {
        const NoiseBundle noise = model.draw(config.seed, p);
        const SamplePath X = solve_mixed_euler(sys, config.x0, noise);
        const FlowPair flow = solve_flow(sys, X, noise);
        const MalliavinMatrix mm = covariance_matrix(sys, X, flow, t_index, weights);
        summary.samples[p] = {p, mm.eigenvalues_C(0), mm.eigenvalues_M(0), mm.det_M, mm.det_C, mm.consistency};
    });

    std::vector<double> lambdas, dets;
    for (const auto& s : summary.samples) {
        lambdas.push_back(s.lambda_min_C);
        dets.push_back(s.det_M);
    }
    summary.probabilities = {0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0};
    for (double p : summary.probabilities) {
        summary.lambda_quantiles.push_back(stats::quantile(lambdas, p));
        summary.det_M_quantiles.push_back(stats::quantile(dets, p));
    }
    summary.eps_grid = config.eps_grid;
    if (summary.eps_grid.empty())
        for (int e = -24; e <= 4; ++e) summary.eps_grid.push_back(std::pow(10.0, 0.5 * e));
    for (double eps : summary.eps_grid) {
        std::size_t hits = 0;
        for (double v : lambdas) hits += v <= eps ? 1 : 0;
        summary.frequency.push_back(static_cast<double>(hits) / static_cast<double>(paths));
    }
    return summary;
}

}  // namespace mixsde
