#include <doctest.h>

#include <cmath>

#include "mixsde/error.hpp"
#include "mixsde/fields.hpp"
#include "mixsde/flow.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/sde.hpp"
#include "mixsde/stats.hpp"

using namespace mixsde;

namespace {

struct Run {
    SamplePath X;
    FlowPair flow;
};

Run run(const CoefficientSystem& sys, const Eigen::VectorXd& x0, const NoiseBundle& noise) {
    SamplePath X = solve_mixed_euler(sys, x0, noise);
    FlowPair f = solve_flow(sys, X, noise);
    return {std::move(X), std::move(f)};
}

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("constant coefficients give identity flows") {
    const auto sys = preset("additive", {{"d", 2}, {"sigma", 2}, {"gamma", 3}});
    const NoiseModel model(TimeGrid(1.0, 128), 2, 2, Hurst(0.7));
    const auto noise = model.draw(1, 0);
    const Run r = run(sys, Eigen::Vector2d(1, 2), noise);
    for (std::size_t k = 0; k <= 128; ++k) {
        CHECK(r.flow.J[k] == Eigen::Matrix2d::Identity());
        CHECK(r.flow.Z[k] == Eigen::Matrix2d::Identity());
    }
    CHECK(r.flow.residual == 0.0);
    CHECK(transition(r.flow.J, r.flow.Z, 10, 100) == Eigen::Matrix2d::Identity());
    CHECK(solve_jacobian(sys, r.X, noise).size() == 129);
    CHECK(solve_inverse(sys, r.X, noise).back() == Eigen::Matrix2d::Identity());
}

TEST_CASE("linear ODE flow") {
    const auto sys = CoefficientSystem::parse(1, 1, 1, {"x1"}, {"0"}, {"0"});
    const NoiseModel model(TimeGrid(1.0, 1 << 12), 1, 1, Hurst(0.7));
    const Run r = run(sys, vec1(0.5), model.draw(2, 0));
    CHECK(std::abs(r.flow.J.back()(0, 0) - std::exp(1.0)) <= 1e-2);
    CHECK(std::abs(r.flow.Z.back()(0, 0) - std::exp(-1.0)) <= 1e-2);
}

TEST_CASE("young linear flow follows exp(B)") {
    const auto sys = CoefficientSystem::parse(1, 0, 1, {"0"}, {}, {"x1"});
    const NoiseModel model(TimeGrid(1.0, 1 << 14), 0, 1, Hurst(0.75));
    std::vector<double> coarse, fine;
    for (std::uint64_t p = 0; p < 20; ++p) {
        const NoiseBundle n = model.draw(4, p);
        const double exact = std::exp(n.B(1 << 14, 0));
        for (std::size_t stride : {4, 1}) {
            const NoiseBundle nn = restrict_noise(n, stride);
            const Run r = run(sys, vec1(2.0), nn);
            const double rel = std::abs(r.flow.J.back()(0, 0) / exact - 1.0);
            (stride == 4 ? coarse : fine).push_back(rel);
            CHECK(rel <= 0.1);
        }
    }
    CHECK(stats::quantile(fine, 0.5) < stats::quantile(coarse, 0.5));
}

TEST_CASE("bounded-smooth flow identity and cocycle") {
    const auto sys = preset("bounded-smooth");
    const Eigen::Vector2d x0(0.2, -0.1);
    std::vector<double> res12, res11;
    const NoiseModel model(TimeGrid(1.0, 1 << 12), 1, 1, Hurst(0.75));
    for (std::uint64_t p = 0; p < 20; ++p) {
        const NoiseBundle n = model.draw(6, p);
        const Run r = run(sys, x0, n);
        res12.push_back(r.flow.residual);
        const Run c = run(sys, x0, restrict_noise(n, 2));
        res11.push_back(c.flow.residual);

        double jz = 0.0;
        for (std::size_t k = 0; k < r.flow.J.size(); ++k) {
            CHECK(r.flow.J[k].determinant() > 0.0);
            jz = std::max(jz, (r.flow.J[k] * r.flow.Z[k] - Eigen::Matrix2d::Identity()).norm());
        }
        CHECK(jz <= 5e-2);

        const auto& J = r.flow.J;
        const auto& Z = r.flow.Z;
        CHECK((transition(J, Z, 700, 700) - Eigen::Matrix2d::Identity()).norm() <= r.flow.residual + 1e-12);
        const Eigen::MatrixXd composed = transition(J, Z, 2500, 4000) * transition(J, Z, 900, 2500);
        CHECK((composed - transition(J, Z, 900, 4000)).norm() <= 2.0 * r.flow.residual);
        CHECK_THROWS_AS(transition(J, Z, 10, 5), Error);
    }
    CHECK(stats::quantile(res12, 0.5) <= 5e-2);
    CHECK(stats::quantile(res12, 0.5) < stats::quantile(res11, 0.5));
}

TEST_CASE("geometric wiener inverse flow needs the correction") {
    // J = X / x0 = exp(W - t/2) and Z = exp(-W + t/2); without the dt correction Z would drift.
    const auto sys = preset("geometric");
    const NoiseModel model(TimeGrid(1.0, 1 << 12), 1, 1, Hurst(0.7));
    std::vector<double> res;
    for (std::uint64_t p = 0; p < 50; ++p) {
        const NoiseBundle n = model.draw(12, p);
        const Run r = run(sys, vec1(1.0), n);
        res.push_back(std::abs(r.flow.Z.back()(0, 0) * std::exp(n.W(1 << 12, 0) - 0.5) - 1.0));
    }
    CHECK(stats::quantile(res, 0.5) <= 5e-2);
}
