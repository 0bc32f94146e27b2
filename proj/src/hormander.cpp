#include "mixsde/hormander.hpp"

#include <cmath>

#include "mixsde/error.hpp"

namespace mixsde {

VectorField lie_bracket(const VectorField& V, const VectorField& W) {
    if (V.size() != W.size() || V.empty()) throw Error("Lie bracket of fields with different dimensions");
    const std::size_t d = V.size();
    const int dim = V.front().dimension();
    for (std::size_t i = 0; i < d; ++i) {
        if (V[i].dimension() != dim || W[i].dimension() != dim || static_cast<std::size_t>(dim) != d)
            throw Error("Lie bracket of fields with different dimensions");
        if (V[i].depends_on(kTimeVariable) || W[i].depends_on(kTimeVariable))
            throw Error("Lie bracket needs autonomous fields");
    }
    VectorField out;
    out.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<Expr> terms;
        for (std::size_t r = 0; r < d; ++r) {
            const int var = static_cast<int>(r + 1);
            terms.push_back(W[i].differentiate(var) * V[r]);
            terms.push_back(-(V[i].differentiate(var) * W[r]));
        }
        out.push_back(sum(terms, dim));
    }
    return out;
}

Eigen::VectorXd evaluate_field(const VectorField& V, std::span<const double> x) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(V.size()));
    for (std::size_t i = 0; i < V.size(); ++i) out(static_cast<Eigen::Index>(i)) = V[i].evaluate(x);
    return out;
}

namespace {

void check_fields(const VectorFieldSet& fields, std::span<const double> x0) {
    if (fields.fields.size() != 1 + fields.diffusion_count()) throw Error("vector field set has wrong length");
    if (x0.size() != fields.dimension) throw Error("x0 has wrong dimension");
}

// Bracket the base fields with one level of nodes.
std::vector<BracketNode> next_level(const VectorFieldSet& fields, const std::vector<BracketNode>& previous,
                                    std::span<const double> x0, bool include_drift, std::size_t budget) {
    std::vector<BracketNode> level;
    const std::size_t first = include_drift ? 0 : 1;
    const std::size_t count = (fields.fields.size() - first) * previous.size();
    if (count > budget) throw Error("bracket hierarchy exceeds the node budget");
    level.reserve(count);
    for (std::size_t i = first; i < fields.fields.size(); ++i) {
        for (const auto& node : previous) {
            BracketNode next;
            next.field = lie_bracket(fields.fields[i], node.field);
            next.word.push_back(i);
            next.word.insert(next.word.end(), node.word.begin(), node.word.end());
            next.level = node.level + 1;
            next.value_at_x0 = evaluate_field(next.field, x0);
            level.push_back(std::move(next));
        }
    }
    return level;
}

std::vector<BracketNode> base_level(const VectorFieldSet& fields, std::span<const double> x0) {
    std::vector<BracketNode> level;
    for (std::size_t j = 1; j < fields.fields.size(); ++j)
        level.push_back({fields.fields[j], {j}, 1, evaluate_field(fields.fields[j], x0)});
    return level;
}

}  // namespace

std::vector<BracketNode> bracket_hierarchy(const VectorFieldSet& fields, std::span<const double> x0,
                                           const HierarchyOptions& options) {
    if (options.max_level < 1) throw Error("hierarchy depth must be at least 1");
    check_fields(fields, x0);
    std::vector<BracketNode> all = base_level(fields, x0);
    if (all.size() > options.max_nodes) throw Error("bracket hierarchy exceeds the node budget");
    std::vector<BracketNode> current = all;
    for (std::size_t k = 2; k <= options.max_level; ++k) {
        current = next_level(fields, current, x0, options.include_drift, options.max_nodes - all.size());
        all.insert(all.end(), current.begin(), current.end());
    }
    return all;
}

RankDecision rank_decision(const Eigen::MatrixXd& vectors, double tol) {
    RankDecision out;
    out.tolerance = tol;
    if (vectors.cols() == 0) return out;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(vectors);
    const Eigen::VectorXd sv = svd.singularValues();
    const double largest = sv.size() > 0 ? sv(0) : 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        out.singular_values.push_back(sv(i));
        if (largest > 0.0 && sv(i) > tol * largest) ++out.rank;
    }
    out.satisfied = out.rank == static_cast<std::size_t>(vectors.rows());
    return out;
}

RankDecision check_simplified(const CoefficientSystem& sys, std::span<const double> x0, double t0, double tol) {
    if (x0.size() != sys.d()) throw Error("x0 has wrong dimension");
    const auto d = static_cast<Eigen::Index>(sys.d());
    Eigen::MatrixXd b(d, static_cast<Eigen::Index>(sys.m())), c(d, static_cast<Eigen::Index>(sys.l()));
    sys.eval_wiener(t0, x0, b);
    sys.eval_fractional(t0, x0, c);
    Eigen::MatrixXd columns(d, b.cols() + c.cols());
    columns << b, c;
    auto decision = rank_decision(columns, tol);
    if (decision.satisfied) decision.achieved_level = 1;
    return decision;
}

RankDecision check_strong(const VectorFieldSet& fields, std::span<const double> x0, std::size_t n0, double tol,
                          bool include_drift, std::size_t max_nodes) {
    if (n0 < 1) throw Error("n0 must be at least 1");
    check_fields(fields, x0);
    const auto d = static_cast<Eigen::Index>(fields.dimension);
    std::vector<BracketNode> current = base_level(fields, x0);
    std::size_t used = current.size();
    if (used > max_nodes) throw Error("bracket hierarchy exceeds the node budget");
    std::vector<Eigen::VectorXd> values;
    RankDecision decision;
    for (std::size_t level = 1;; ++level) {
        for (const auto& node : current) values.push_back(node.value_at_x0);
        Eigen::MatrixXd columns(d, static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) columns.col(static_cast<Eigen::Index>(i)) = values[i];
        decision = rank_decision(columns, tol);
        if (decision.satisfied) {
            decision.achieved_level = level;
            return decision;
        }
        if (level == n0) return decision;
        current = next_level(fields, current, x0, include_drift, max_nodes - used);
        used += current.size();
    }
}

}  // namespace mixsde

