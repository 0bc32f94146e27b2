#include "mixsde/sde.hpp"

#include "mixsde/error.hpp"

namespace mixsde {

SamplePath solve_mixed_euler(const CoefficientSystem& sys, const Eigen::VectorXd& x0, const NoiseBundle& noise) {
    const TimeGrid& grid = noise.W.grid();
    if (!(noise.B.grid() == grid)) throw Error("Wiener and fBm paths live on different grids");
    if (noise.W.dimension() != sys.m() || noise.B.dimension() != sys.l())
        throw Error("noise dimensions do not match the coefficient system");
    if (static_cast<std::size_t>(x0.size()) != sys.d()) throw Error("initial condition has wrong dimension");
    if (!x0.allFinite()) throw Error("initial condition must be finite");

    const auto d = static_cast<Eigen::Index>(sys.d());
    const auto m = static_cast<Eigen::Index>(sys.m());
    const auto l = static_cast<Eigen::Index>(sys.l());
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < d; ++i) labels.push_back("X" + std::to_string(i + 1));
    SamplePath X(grid, sys.d(), std::move(labels));

    Eigen::VectorXd x = x0, a(d), dw(m), db(l);
    Eigen::MatrixXd b(d, m), c(d, l);
    const double h = grid.step();
    X.row(0) = x.transpose();
    for (std::size_t k = 0; k < grid.steps(); ++k) try {
        const double t = grid.time(k);
        std::span<const double> state(x.data(), static_cast<std::size_t>(d));
        sys.eval_drift(t, state, a);
        Eigen::VectorXd next = x + a * h;
        if (m > 0) {
            sys.eval_wiener(t, state, b);
            dw = (noise.W.row(k + 1) - noise.W.row(k)).transpose();
            next.noalias() += b * dw;
        }
        if (l > 0) {
            sys.eval_fractional(t, state, c);
            db = (noise.B.row(k + 1) - noise.B.row(k)).transpose();
            next.noalias() += c * db;
        }
        if (!next.allFinite()) throw SolverError("non-finite state", k + 1);
        x = next;
        X.row(k + 1) = x.transpose();
    } catch (const DomainError& err) {
        throw SolverError(std::string("coefficient evaluation failed: ") + err.what(), k);
    }
    return X;
}

namespace {
void check_scalar_pair(const SamplePath& f, const SamplePath& g) {
    if (!(f.grid() == g.grid())) throw Error("integrand and integrator live on different grids");
    if (f.dimension() != 1 || g.dimension() != 1) throw Error("scalar paths required");
}
}  // namespace

double young_integral(const SamplePath& f, const SamplePath& g) {
    check_scalar_pair(f, g);
    double s = 0.0;
    for (std::size_t k = 0; k < f.grid().steps(); ++k) s += f(k, 0) * (g(k + 1, 0) - g(k, 0));
    return s;
}

double ito_integral(const SamplePath& f, const SamplePath& w) {
    // Same left-point sum; adaptedness is what makes it the Ito integral.
    return young_integral(f, w);
}

}  // namespace mixsde
