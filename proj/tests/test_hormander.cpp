#include <doctest.h>

#include <cmath>

#include "mixsde/error.hpp"
#include "mixsde/fields.hpp"
#include "mixsde/hormander.hpp"
#include "mixsde/rng.hpp"

using namespace mixsde;

namespace {

VectorField field(std::initializer_list<const char*> src, int d) {
    VectorField out;
    for (const char* s : src) out.push_back(Expr::parse(s, d));
    return out;
}

Eigen::VectorXd at(const VectorField& V, const std::vector<double>& x) { return evaluate_field(V, x); }

// Polynomial fields on R^3 used for the algebraic identities.
const std::vector<VectorField>& corpus() {
    static const std::vector<VectorField> fields{
        field({"1", "0", "0"}, 3),
        field({"x2", "-x1", "0"}, 3),
        field({"x1*x2", "x3^2", "1 - x1"}, 3),
        field({"x1^3 - x2", "x2*x3 + 2", "x1*x2*x3"}, 3),
        field({"0.5*x3", "x1^2 + x2^2", "-3*x2"}, 3),
        field({"x2^2 - x3", "4*x1", "x1*x3 - x2^3"}, 3),
    };
    return fields;
}

}  // namespace

TEST_CASE("lie bracket examples") {
    const VectorField c1 = field({"1", "2"}, 2), c2 = field({"-3", "0.5"}, 2);
    for (const auto& e : lie_bracket(c1, c2)) CHECK(e.is_zero());

    const Eigen::Matrix2d A{{1, 2}, {-1, 0.5}}, B{{0, 3}, {1, -2}};
    const VectorField V = field({"x1 + 2*x2", "-x1 + 0.5*x2"}, 2);
    const VectorField W = field({"3*x2", "x1 - 2*x2"}, 2);
    const VectorField VW = lie_bracket(V, W);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        const Eigen::Vector2d x(rng.normal(), rng.normal());
        const Eigen::Vector2d expected = (B * A - A * B) * x;
        CHECK((at(VW, {x(0), x(1)}) - expected).norm() <= 1e-12);
    }

    const VectorField h = lie_bracket(field({"1", "0"}, 2), field({"0", "x1"}, 2));
    CHECK(h[0].is_zero());
    CHECK(h[1].is_constant());
    CHECK(at(h, {7, -3}) == Eigen::Vector2d(0, 1));
    CHECK_THROWS_AS(lie_bracket(field({"1", "0"}, 2), field({"1"}, 1)), Error);
}

TEST_CASE("antisymmetry and jacobi on the polynomial corpus") {
    Rng rng(2);
    const auto& F = corpus();
    double anti = 0.0, jacobi = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        for (std::size_t j = 0; j < F.size(); ++j) {
            const VectorField a = lie_bracket(F[i], F[j]), b = lie_bracket(F[j], F[i]);
            for (int n = 0; n < 100; ++n) {
                std::vector<double> x{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
                anti = std::max(anti, (at(a, x) + at(b, x)).cwiseAbs().maxCoeff());
            }
        }
    for (std::size_t i = 0; i < F.size(); ++i)
        for (std::size_t j = i + 1; j < F.size(); ++j)
            for (std::size_t k = j + 1; k < F.size(); ++k) {
                const auto &U = F[i], &V = F[j], &W = F[k];
                const VectorField t1 = lie_bracket(U, lie_bracket(V, W));
                const VectorField t2 = lie_bracket(V, lie_bracket(W, U));
                const VectorField t3 = lie_bracket(W, lie_bracket(U, V));
                for (int n = 0; n < 20; ++n) {
                    std::vector<double> x{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
                    jacobi = std::max(jacobi, (at(t1, x) + at(t2, x) + at(t3, x)).cwiseAbs().maxCoeff());
                }
            }
    CHECK(anti <= 1e-12);
    CHECK(jacobi <= 1e-10);
}

TEST_CASE("bracket hierarchy") {
    const auto heis = preset("heisenberg").vector_fields();
    const std::vector<double> origin{0, 0};
    const auto nodes = bracket_hierarchy(heis, origin, {3, false, 10000});
    CHECK(nodes.size() == 2 + 4 + 8);
    CHECK(nodes[0].word == std::vector<std::size_t>{1});
    CHECK(nodes[0].value_at_x0 == Eigen::Vector2d(1, 0));
    CHECK(nodes[1].value_at_x0 == Eigen::Vector2d(0, 0));
    // [V1, V2] is the word (1, 2).
    bool found = false;
    for (const auto& n : nodes)
        if (n.word == std::vector<std::size_t>{1, 2}) {
            found = true;
            CHECK(n.level == 2);
            CHECK(n.value_at_x0 == Eigen::Vector2d(0, 1));
        }
    CHECK(found);

    const auto with_drift = bracket_hierarchy(heis, origin, {3, true, 10000});
    CHECK(with_drift.size() == 2 + 3 * 2 + 3 * 6);
    CHECK_THROWS_AS(bracket_hierarchy(heis, origin, {3, false, 10}), Error);
    CHECK_THROWS_AS(bracket_hierarchy(heis, origin, {0, false, 10}), Error);

    const auto flat = preset("additive", {{"d", 2}}).vector_fields();
    for (const auto& n : bracket_hierarchy(flat, origin, {3, false, 10000}))
        if (n.level >= 2)
            for (const auto& e : n.field) CHECK(e.is_zero());
    CHECK(bracket_hierarchy(flat, origin, {3, false, 10000}).size() == 4 + 16 + 64);
}

TEST_CASE("simplified condition") {
    const std::vector<double> x{0.3, -0.7};
    const auto full = CoefficientSystem::parse(2, 2, 0, {"0", "0"}, {"1", "0", "0", "1"}, {});
    auto r = check_simplified(full, x);
    CHECK(r.satisfied);
    CHECK(r.rank == 2);
    CHECK(r.achieved_level == std::optional<std::size_t>(1));

    const auto single = CoefficientSystem::parse(2, 1, 0, {"0", "0"}, {"1", "0"}, {});
    r = check_simplified(single, x);
    CHECK_FALSE(r.satisfied);
    CHECK(r.rank == 1);

    const auto close = CoefficientSystem::parse(2, 2, 0, {"0", "0"}, {"1", "1", "0", "1e-12"}, {});
    r = check_simplified(close, x, 0.0, 1e-8);
    CHECK(r.rank == 1);
    CHECK_FALSE(r.satisfied);
    CHECK(r.singular_values[1] == doctest::Approx(std::sqrt(0.5) * 1e-12).epsilon(1e-3));
    CHECK(r.singular_values[0] >= r.singular_values[1]);
}

TEST_CASE("strong condition") {
    const std::vector<double> origin{0, 0};
    auto r = check_strong(preset("heisenberg").vector_fields(), origin, 3);
    CHECK(r.satisfied);
    CHECK(r.achieved_level == std::optional<std::size_t>(2));

    r = check_strong(preset("degenerate").vector_fields(), origin, 4);
    CHECK_FALSE(r.satisfied);
    CHECK(r.rank == 1);
    CHECK_FALSE(r.achieved_level.has_value());

    r = check_strong(preset("degenerate").vector_fields(), origin, 4, 1e-8, true);
    CHECK_FALSE(r.satisfied);

    r = check_strong(preset("additive", {{"d", 2}}).vector_fields(), origin, 3);
    CHECK(r.achieved_level == std::optional<std::size_t>(1));
}

TEST_CASE("rank decisions are scale invariant") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 0, 2, 0, 1e-3, 0;
    const auto a = rank_decision(m, 1e-8);
    const auto b = rank_decision(1e6 * m, 1e-8);
    CHECK(a.rank == 2);
    CHECK(b.rank == 2);
    CHECK(rank_decision(Eigen::MatrixXd::Zero(2, 2), 1e-8).rank == 0);
}
