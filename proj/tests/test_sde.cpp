#include <doctest.h>

#include <cmath>

#include "mixsde/error.hpp"
#include "mixsde/fields.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/sde.hpp"
#include "mixsde/stats.hpp"
#include "mixsde/util.hpp"

using namespace mixsde;

namespace {

SamplePath deterministic(const TimeGrid& g, double (*f)(double)) {
    SamplePath p(g, 1);
    for (std::size_t k = 0; k < g.points(); ++k) p(k, 0) = f(g.time(k));
    return p;
}

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("zero dynamics and deterministic drift") {
    const NoiseModel model(TimeGrid(1.0, 64), 1, 1, Hurst(0.7));
    const auto noise = model.draw(1, 0);
    const auto zero = CoefficientSystem::parse(2, 1, 1, {"0", "0"}, {"0", "0"}, {"0", "0"});
    const SamplePath X = solve_mixed_euler(zero, Eigen::Vector2d(1.5, -2), noise);
    for (std::size_t k = 0; k <= 64; ++k) CHECK(X.row(k) == Eigen::RowVector2d(1.5, -2));
    CHECK(X.labels() == std::vector<std::string>{"X1", "X2"});

    const auto drift = CoefficientSystem::parse(1, 1, 1, {"1"}, {"0"}, {"0"});
    const SamplePath Y = solve_mixed_euler(drift, vec1(0), noise);
    for (std::size_t k = 0; k <= 64; ++k) CHECK(Y(k, 0) == doctest::Approx(noise.grid().time(k)).epsilon(1e-14));
}

TEST_CASE("young linear equation converges to exp(B)") {
    // Fine noise is drawn once and restricted, so every level sees the same path.
    const auto sys = CoefficientSystem::parse(1, 0, 1, {"0"}, {}, {"x1"});
    const NoiseModel model(TimeGrid(1.0, 1 << 14), 0, 1, Hurst(0.7));
    std::vector<std::vector<double>> err(5);
    for (std::uint64_t p = 0; p < 20; ++p) {
        const NoiseBundle fine = model.draw(77, p);
        const double exact = std::exp(fine.B(1 << 14, 0));
        for (std::size_t lvl = 0; lvl < 5; ++lvl) {
            const NoiseBundle n = restrict_noise(fine, std::size_t{16} >> lvl);
            const SamplePath X = solve_mixed_euler(sys, vec1(1.0), n);
            err[lvl].push_back(std::abs(X(n.grid().steps(), 0) - exact));
        }
    }
    for (std::size_t lvl = 1; lvl < 5; ++lvl) CHECK(stats::quantile(err[lvl], 0.5) < stats::quantile(err[lvl - 1], 0.5));
}

TEST_CASE("ito geometric law") {
    const auto sys = CoefficientSystem::parse(1, 1, 0, {"0"}, {"x1"}, {});
    const NoiseModel model(TimeGrid(1.0, 1 << 12), 1, 0, Hurst(0.75));
    std::vector<double> xt(10000);
    parallel_for(xt.size(), [&](std::size_t p) {
        xt[p] = solve_mixed_euler(sys, vec1(1.0), model.draw(5, p))(1 << 12, 0);
    });
    // X_1 = exp(W_1 - 1/2) is lognormal.
    auto ks = stats::ks_test(xt, [](double x) { return x <= 0 ? 0.0 : stats::normal_cdf(std::log(x) + 0.5); });
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("young integral") {
    const TimeGrid g(1.0, 1000);
    Rng rng(1);
    const SamplePath B = sample_fbm(g, 1, Hurst(0.7), rng);
    SamplePath one(g, 1);
    one.values().setOnes();
    CHECK(young_integral(one, B) == doctest::Approx(B(1000, 0) - B(0, 0)).epsilon(1e-12));

    const SamplePath id = deterministic(g, [](double t) { return t; });
    CHECK(std::abs(young_integral(id, id) - 0.5) <= 1.0 / 1000);
    CHECK_THROWS_AS(young_integral(id, sample_fbm(TimeGrid(1.0, 500), 1, Hurst(0.7), rng)), Error);
}

TEST_CASE("young sums self-converge at the Young rate") {
    // Lipschitz integrand (theta = 1) against fBm: consecutive levels differ by
    // O(n^{-(theta + H - 1)}) from the Young-Loeve estimate.
    const double H = 0.75;
    const std::size_t fine_n = 1 << 14;
    const FbmGenerator gen(TimeGrid(1.0, fine_n), Hurst(H));
    std::vector<double> logn, logd;
    std::vector<std::vector<double>> diffs(6);
    for (std::uint64_t p = 0; p < 30; ++p) {
        Rng rng(3, p, Stream::Fractional);
        const SamplePath B = gen.sample(1, rng);
        auto level = [&](std::size_t stride) {
            const SamplePath b = restrict_path(B, stride);
            return young_integral(deterministic(b.grid(), [](double t) { return std::sin(3 * t); }), b);
        };
        for (std::size_t i = 0; i < 6; ++i) diffs[i].push_back(std::abs(level(std::size_t{64} >> i) - level(std::size_t{32} >> i)));
    }
    for (std::size_t i = 0; i < 6; ++i) {
        logn.push_back(std::log(static_cast<double>(fine_n / (std::size_t{64} >> i))));
        logd.push_back(std::log(stats::quantile(diffs[i], 0.5)));
    }
    const double slope = stats::least_squares(logn, logd).slope;
    CHECK(slope <= -(1.0 + H - 1.0 - 0.1));
}

TEST_CASE("ito integral") {
    const TimeGrid g(1.0, 1024);
    Rng rng(8);
    const SamplePath W = sample_wiener(g, 1, rng);
    SamplePath one(g, 1);
    one.values().setOnes();
    CHECK(ito_integral(one, W) == doctest::Approx(W(1024, 0)).epsilon(1e-12));

    std::vector<double> diff, bounded;
    for (std::uint64_t p = 0; p < 10000; ++p) {
        Rng r(9, p, Stream::Wiener);
        const SamplePath w = sample_wiener(g, 1, r);
        const double wt = w(1024, 0);
        diff.push_back(ito_integral(w, w) - (wt * wt - 1.0) / 2.0);
        SamplePath f(g, 1);
        for (std::size_t k = 0; k <= 1024; ++k) f(k, 0) = std::sin(w(k, 0));
        bounded.push_back(ito_integral(f, w));
    }
    // The gap is -(sum dW^2 - T)/2, centered with sd T / sqrt(2n).
    CHECK(std::abs(stats::mean(diff)) <= 3.0 * stats::standard_error(diff));
    CHECK(std::sqrt(stats::variance(diff)) == doctest::Approx(1.0 / std::sqrt(2.0 * 1024)).epsilon(0.1));
    CHECK(std::abs(stats::mean(bounded)) <= 3.0 * stats::standard_error(bounded));
}

TEST_CASE("determinism and overflow reporting") {
    const auto sys = preset("bounded-smooth");
    const NoiseModel model(TimeGrid(1.0, 256), 1, 1, Hurst(0.6));
    const Eigen::Vector2d x0(0.1, -0.2);
    CHECK(solve_mixed_euler(sys, x0, model.draw(3, 4)).values() == solve_mixed_euler(sys, x0, model.draw(3, 4)).values());

    const auto blow = CoefficientSystem::parse(1, 1, 0, {"x1^2"}, {"0"}, {});
    const NoiseModel m1(TimeGrid(10.0, 1024), 1, 0, Hurst(0.6));
    try {
        solve_mixed_euler(blow, vec1(5.0), m1.draw(0, 0));
        FAIL("expected overflow");
    } catch (const SolverError& err) {
        CHECK(err.step() > 0);
        CHECK(err.step() < 1024);
    }
}

TEST_CASE("bounded-smooth strong self-convergence") {
    const auto sys = preset("bounded-smooth");
    const NoiseModel model(TimeGrid(1.0, 1 << 13), 1, 1, Hurst(0.75));
    const Eigen::Vector2d x0(0.3, -0.4);
    std::vector<std::vector<double>> gaps(4);
    for (std::uint64_t p = 0; p < 50; ++p) {
        const NoiseBundle fine = model.draw(21, p);
        std::vector<Eigen::VectorXd> terminal;
        for (std::size_t stride : {16, 8, 4, 2, 1}) {
            const NoiseBundle n = restrict_noise(fine, stride);
            terminal.push_back(solve_mixed_euler(sys, x0, n).row(n.grid().steps()).transpose());
        }
        for (std::size_t i = 0; i < 4; ++i) gaps[i].push_back((terminal[i] - terminal[i + 1]).norm());
    }
    for (std::size_t i = 1; i < 4; ++i) CHECK(stats::quantile(gaps[i], 0.5) < stats::quantile(gaps[i - 1], 0.5));
}

TEST_CASE("no overflow for linear-growth presets") {
    for (const auto& name : preset_names()) {
        const auto sys = preset(name);
        const NoiseModel model(TimeGrid(1.0, 1 << 12), sys.m(), sys.l(), Hurst(0.6));
        const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(sys.d()), 0.5);
        std::vector<int> ok(1000, 0);
        parallel_for(ok.size(), [&](std::size_t p) { ok[p] = solve_mixed_euler(sys, x0, model.draw(1, p)).all_finite(); });
        CHECK_MESSAGE(std::count(ok.begin(), ok.end(), 1) == 1000, name);
    }
}
