#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixsde/density.hpp"
#include "mixsde/error.hpp"
#include "mixsde/fields.hpp"
#include "mixsde/rng.hpp"
#include "mixsde/stats.hpp"

using namespace mixsde;

namespace {

Ensemble synthetic_normal(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed, 0, Stream::Synthetic);
    RowMatrix s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < s.rows(); ++i)
        for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = rng.normal();
    return Ensemble::from_samples(std::move(s));
}

EnsembleConfig additive(std::size_t n, std::uint64_t seed) {
    return {std::make_shared<const CoefficientSystem>(preset("additive", {{"sigma", 2}, {"gamma", 3}})),
            Eigen::VectorXd::Constant(1, 0.5), TimeGrid(1.0, n), Hurst(0.75), seed};
}

EnsembleConfig zero_dynamics() {
    return {std::make_shared<const CoefficientSystem>(CoefficientSystem::parse(2, 1, 1, {"0", "0"}, {"0", "0"}, {"0", "0"})),
            Eigen::Vector2d(1.0, -1.0), TimeGrid(1.0, 64), Hurst(0.7), 3};
}

}  // namespace

TEST_CASE("ensembles") {
    const Ensemble flat = run_ensemble(zero_dynamics(), 1.0, 100);
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat.samples.row(static_cast<Eigen::Index>(i)) == Eigen::RowVector2d(1, -1));

    const Ensemble a = run_ensemble(additive(256, 4), 1.0, 2000), b = run_ensemble(additive(256, 4), 1.0, 2000);
    CHECK(a.samples == b.samples);
    CHECK(a.fingerprint == b.fingerprint);
    CHECK(a.fingerprint != run_ensemble(additive(256, 5), 1.0, 100).fingerprint);
    const auto x = a.column(0);
    CHECK(std::abs(stats::mean(x) - 0.5) <= 3.0 * stats::standard_error(x));
    CHECK(run_ensemble(additive(256, 4), 0.5, 10).t == 0.5);
    CHECK_THROWS_AS(run_ensemble(additive(256, 4), 0.3, 10), Error);
}

TEST_CASE("solver overflow names the path and seed") {
    EnsembleConfig cfg{std::make_shared<const CoefficientSystem>(CoefficientSystem::parse(1, 1, 0, {"x1^2"}, {"1"}, {})),
                       Eigen::VectorXd::Constant(1, 3.0), TimeGrid(10.0, 1024), Hurst(0.7), 17};
    try {
        run_ensemble(cfg, 10.0, 4);
        FAIL("expected overflow");
    } catch (const SolverError& err) {
        CHECK(std::string(err.what()).find("path 0, seed 17") != std::string::npos);
    }
}

TEST_CASE("kernel density estimate") {
    const Ensemble e = synthetic_normal(10000, 1, 1);
    const DensityTable t = kde(e, 0);
    CHECK(t.x.size() == 512);
    CHECK(std::abs(t.mass - 1.0) <= 1e-3);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.x.size(); ++i) {
        CHECK(t.density[i] >= 0.0);
        worst = std::max(worst, std::abs(t.density[i] - stats::normal_pdf(t.x[i])));
    }
    CHECK(worst <= 0.05);
    CHECK(t.bandwidth == doctest::Approx(silverman_bandwidth(e.column(0))));
    CHECK(kde(e, 0, 0.3).bandwidth == 0.3);
    CHECK(std::abs(kde(e, 0, 0.05).mass - 1.0) <= 1e-3);

    CHECK_THROWS_AS(kde(std::vector<double>(500, 2.0)), Error);
    CHECK_THROWS_AS(kde(std::vector<double>(50, 2.0)), Error);
}

TEST_CASE("gaussian check") {
    const Ensemble normal = synthetic_normal(10000, 2, 2);
    CHECK(gaussian_check(normal, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()).pass);

    RowMatrix u(10000, 1);
    Rng rng(3, 0, Stream::Synthetic);
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, 0) = std::sqrt(12.0) * (rng.uniform() - 0.5);
    const auto report = gaussian_check(Ensemble::from_samples(u), Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    CHECK_FALSE(report.pass);
    CHECK(report.components[0].p_value < 0.01);

    Eigen::Matrix2d singular;
    singular << 1, 1, 1, 1;
    CHECK_THROWS_AS(gaussian_check(normal, Eigen::Vector2d::Zero(), singular), Error);
    CHECK(gaussian_check(normal, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()).threshold == 0.005);
}

TEST_CASE("additive preset law is Normal(x0, 13)") {
    const Ensemble e = run_ensemble(additive(1 << 12, 6), 1.0, 10000);
    CHECK(gaussian_check(e, Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Constant(1, 1, 13.0)).pass);
}

TEST_CASE("gaussian check decision is seed-stable") {
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(1, 0.5);
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, 13.0);
    const bool a = gaussian_check(run_ensemble(additive(1 << 10, 100), 1.0, 10000), mean, cov).pass;
    const bool b = gaussian_check(run_ensemble(additive(1 << 10, 200), 1.0, 10000), mean, cov).pass;
    CHECK(a == b);
}

TEST_CASE("small-ball probe") {
    const std::vector<double> radii{0.2, 0.1, 0.05};
    const Ensemble atom = run_ensemble(zero_dynamics(), 1.0, 100);
    const auto rows = small_ball_probe(atom, Eigen::Vector2d(1, -1), radii);
    for (const auto& r : rows) {
        CHECK(r.frequency == 1.0);
        CHECK(r.ratio == doctest::Approx(1.0 / (r.radius * r.radius)));
    }

    const Ensemble normal = synthetic_normal(100000, 1, 11);
    const double target = 2.0 * stats::normal_pdf(0.0);
    for (const auto& r : small_ball_probe(normal, Eigen::VectorXd::Zero(1), std::vector<double>{0.2, 0.15, 0.1, 0.05})) {
        // Curvature bias is about target * r^2 / 6.
        const double se = std::sqrt(r.frequency * (1 - r.frequency) / 100000.0) / r.radius;
        CHECK(std::abs(r.ratio - target) <= 3.0 * se + target * r.radius * r.radius / 6.0);
    }
}

TEST_CASE("small-ball dichotomy on presets") {
    const std::vector<double> radii{0.4, 0.2, 0.1};
    // Hoermander-satisfying: full-rank additive noise in d = 2, ratio stays bounded.
    EnsembleConfig full{std::make_shared<const CoefficientSystem>(preset("additive", {{"d", 2}})),
                        Eigen::Vector2d::Zero(), TimeGrid(1.0, 256), Hurst(0.7), 8};
    const auto ok = small_ball_probe(run_ensemble(full, 1.0, 20000), Eigen::Vector2d::Zero(), radii);
    CHECK(ok.back().ratio <= 2.0 * ok.front().ratio);

    // Degenerate preset: mass lives on the line x2 = 0, so frequency / r is what stays stable.
    EnsembleConfig deg{std::make_shared<const CoefficientSystem>(preset("degenerate")), Eigen::Vector2d::Zero(),
                       TimeGrid(1.0, 256), Hurst(0.7), 9};
    const auto line = small_ball_probe(run_ensemble(deg, 1.0, 20000), Eigen::Vector2d::Zero(), radii);
    for (const auto& r : line) {
        const double per_r = r.frequency / r.radius;
        const double ref = line.front().frequency / line.front().radius;
        const double se = std::sqrt(r.frequency / 20000.0) / r.radius;
        CHECK(std::abs(per_r - ref) <= 3.0 * se + 0.1 * ref);
    }
    CHECK(line.back().ratio >= 3.0 * line.front().ratio);
}

TEST_CASE("integrability exponents") {
    for (double H : {0.55, 0.6, 0.65, 0.7, 0.8, 0.95})
        for (double theta : {0.05, 0.2, 0.4, 0.49}) {
            const auto e = IntegrabilityExponents::compute(H, theta);
            CHECK(e.q_star > 0.0);
            CHECK(e.q_star < 1.0);
            // (H - 1/2)/(3 - 4H) changes sign at H = 3/4, so the comparison is meaningful below it.
            if (H < 0.75) CHECK((e.theta_star < 0.5) == (H < 2.0 / 3.0));
        }
    CHECK(IntegrabilityExponents::compute(0.6, 0.4).q_star == doctest::Approx(0.8));
}

TEST_CASE("exponential integrability study") {
    const std::vector<double> q{0.3, 0.6};
    auto flat = holder_integrability_study(zero_dynamics(), 0.3, std::vector<double>{0.0, 2.0}, q, 100);
    for (const auto& c : flat.cells) {
        CHECK(c.estimate_N == 1.0);
        CHECK(c.estimate_2N == 1.0);
    }

    EnsembleConfig cfg{std::make_shared<const CoefficientSystem>(preset("bounded-smooth")), Eigen::Vector2d::Zero(),
                       TimeGrid(1.0, 512), Hurst(0.6), 10};
    const double qs = IntegrabilityExponents::compute(0.6, 0.4).q_star;
    const auto table = holder_integrability_study(cfg, 0.4, std::vector<double>{0.0, 1.0}, std::vector<double>{0.8 * qs}, 1000);
    CHECK(table.cells[0].estimate_N == 1.0);
    const auto& c = table.cells[1];
    CHECK(std::isfinite(c.estimate_2N));
    CHECK_FALSE(c.overflow);
    CHECK(std::abs(c.ratio - 1.0) <= 0.2);
    CHECK_THROWS_AS(holder_integrability_study(cfg, 0.5, std::vector<double>{1.0}, q, 10), Error);
}

TEST_CASE("kolmogorov tail and KS statistics") {
    // Tabulated critical values of the limiting distribution.
    CHECK(stats::kolmogorov_survival(1.2238) == doctest::Approx(0.10).epsilon(2e-3));
    CHECK(stats::kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(stats::kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
    const auto one = stats::ks_test({0.1, 0.5, 0.9}, [](double x) { return x; });
    CHECK(one.statistic == doctest::Approx(0.7 / 3.0));
    const auto two = stats::ks_test_two_sample({1, 2, 3, 4}, {1, 2, 3, 4});
    CHECK(two.statistic == 0.0);
    CHECK(two.p_value == doctest::Approx(1.0));
    CHECK(stats::ks_test_two_sample({1, 2, 3, 4}, {5, 6, 7, 8}).statistic == 1.0);
}
