#include "mixsde/fields.hpp"

#include <algorithm>
#include <cmath>

#include "mixsde/error.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

CoefficientSystem::CoefficientSystem(std::size_t d, std::size_t m, std::size_t l, std::vector<Expr> a,
                                     std::vector<Expr> b, std::vector<Expr> c, bool time_dependent)
    : d_(d), m_(m), l_(l), time_dependent_(time_dependent), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    if (d_ == 0) throw Error("state dimension must be positive");
    if (a_.size() != d_) throw Error("drift needs d expressions");
    if (b_.size() != d_ * m_) throw Error("Wiener coefficient needs d*m expressions");
    if (c_.size() != d_ * l_) throw Error("fBm coefficient needs d*l expressions");
    auto check = [&](const std::vector<Expr>& exprs) {
        for (const auto& e : exprs) {
            if (e.dimension() != static_cast<int>(d_)) throw Error("coefficient expression has wrong dimension");
            if (!time_dependent_ && e.depends_on(kTimeVariable))
                throw Error("autonomous system references the time variable");
        }
    };
    check(a_);
    check(b_);
    check(c_);

    jac_.resize(1 + m_ + l_);
    auto build = [&](std::size_t slot, FieldRef which) {
        auto exprs = field(which);
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t r = 0; r < d_; ++r) {
                Expr de = exprs[i].differentiate(static_cast<int>(r + 1));
                if (!de.is_zero()) jac_[slot].push_back({i, r, std::move(de)});
            }
    };
    build(0, {FieldKind::Drift, 0});
    for (std::size_t k = 0; k < m_; ++k) build(1 + k, {FieldKind::Wiener, k});
    for (std::size_t q = 0; q < l_; ++q) build(1 + m_ + q, {FieldKind::Fractional, q});
}

CoefficientSystem CoefficientSystem::parse(std::size_t d, std::size_t m, std::size_t l,
                                           const std::vector<std::string>& a, const std::vector<std::string>& b,
                                           const std::vector<std::string>& c, bool time_dependent) {
    auto conv = [&](const std::vector<std::string>& src) {
        std::vector<Expr> out;
        out.reserve(src.size());
        for (const auto& s : src) out.push_back(Expr::parse(s, static_cast<int>(d), time_dependent));
        return out;
    };
    return CoefficientSystem(d, m, l, conv(a), conv(b), conv(c), time_dependent);
}

std::vector<Expr> CoefficientSystem::field(FieldRef which) const {
    std::vector<Expr> out;
    out.reserve(d_);
    switch (which.kind) {
        case FieldKind::Drift: return a_;
        case FieldKind::Wiener:
            if (which.column >= m_) throw Error("Wiener column out of range");
            for (std::size_t i = 0; i < d_; ++i) out.push_back(b_[i * m_ + which.column]);
            return out;
        case FieldKind::Fractional:
            if (which.column >= l_) throw Error("fBm column out of range");
            for (std::size_t i = 0; i < d_; ++i) out.push_back(c_[i * l_ + which.column]);
            return out;
    }
    return out;
}

const std::vector<CoefficientSystem::Derivative>& CoefficientSystem::derivatives(FieldRef which) const {
    switch (which.kind) {
        case FieldKind::Drift: return jac_[0];
        case FieldKind::Wiener:
            if (which.column >= m_) throw Error("Wiener column out of range");
            return jac_[1 + which.column];
        case FieldKind::Fractional:
            if (which.column >= l_) throw Error("fBm column out of range");
            return jac_[1 + m_ + which.column];
    }
    return jac_[0];
}

namespace {
void check_point(std::span<const double> x, std::size_t d) {
    if (x.size() != d) throw Error("state has wrong dimension");
}
}  // namespace

void CoefficientSystem::eval_drift(double t, std::span<const double> x, Eigen::Ref<Eigen::VectorXd> out) const {
    for (std::size_t i = 0; i < d_; ++i) out(static_cast<Eigen::Index>(i)) = a_[i].evaluate(x, t);
}

void CoefficientSystem::eval_wiener(double t, std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) const {
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t k = 0; k < m_; ++k)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = b_[i * m_ + k].evaluate(x, t);
}

void CoefficientSystem::eval_fractional(double t, std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) const {
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t q = 0; q < l_; ++q)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = c_[i * l_ + q].evaluate(x, t);
}

void CoefficientSystem::eval_jacobian(FieldRef which, double t, std::span<const double> x,
                                      Eigen::Ref<Eigen::MatrixXd> out) const {
    out.setZero();
    for (const auto& entry : derivatives(which))
        out(static_cast<Eigen::Index>(entry.row), static_cast<Eigen::Index>(entry.var)) = entry.expr.evaluate(x, t);
}

bool CoefficientSystem::has_constant_field(FieldRef which) const { return derivatives(which).empty(); }

Eigen::VectorXd CoefficientSystem::eval_field(FieldRef which, double t, std::span<const double> x) const {
    check_point(x, d_);
    auto exprs = field(which);
    Eigen::VectorXd out(static_cast<Eigen::Index>(d_));
    for (std::size_t i = 0; i < d_; ++i) out(static_cast<Eigen::Index>(i)) = exprs[i].evaluate(x, t);
    return out;
}

Eigen::MatrixXd CoefficientSystem::jacobian(FieldRef which, double t, std::span<const double> x) const {
    check_point(x, d_);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
    eval_jacobian(which, t, x, out);
    return out;
}

VectorFieldSet CoefficientSystem::vector_fields() const {
    if (time_dependent_) throw Error("vector fields require an autonomous system");
    VectorFieldSet set{d_, m_, l_, {}};
    set.fields.push_back(a_);
    for (std::size_t k = 0; k < m_; ++k) set.fields.push_back(field({FieldKind::Wiener, k}));
    for (std::size_t q = 0; q < l_; ++q) set.fields.push_back(field({FieldKind::Fractional, q}));
    return set;
}

std::vector<std::string> CoefficientSystem::describe() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < d_; ++i) out.push_back("a" + std::to_string(i + 1) + " = " + a_[i].to_string());
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t k = 0; k < m_; ++k)
            out.push_back("b" + std::to_string(i + 1) + "_" + std::to_string(k + 1) + " = " +
                          b_[i * m_ + k].to_string());
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t q = 0; q < l_; ++q)
            out.push_back("c" + std::to_string(i + 1) + "_" + std::to_string(q + 1) + " = " +
                          c_[i * l_ + q].to_string());
    return out;
}

Eigen::VectorXd eval_field(const CoefficientSystem& sys, FieldRef which, double t, std::span<const double> x) {
    return sys.eval_field(which, t, x);
}

Eigen::MatrixXd jacobian(const CoefficientSystem& sys, FieldRef which, double t, std::span<const double> x) {
    return sys.jacobian(which, t, x);
}

namespace {

double param(const PresetParams& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& name, const PresetParams& params, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : params) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw Error("preset '" + name + "' has no parameter '" + key + "'");
    }
}

std::string num(double v) {
    // Negative constants are parenthesized so they can be spliced into products.
    return v < 0.0 ? "(" + format_double(v) + ")" : format_double(v);
}

}  // namespace

CoefficientSystem preset(const std::string& name, const PresetParams& params) {
    if (name == "additive") {
        reject_unknown(name, params, {"d", "sigma", "gamma"});
        const double dd = param(params, "d", 1.0);
        if (dd < 1.0 || dd != std::floor(dd)) throw Error("preset 'additive': d must be a positive integer");
        const auto d = static_cast<std::size_t>(dd);
        const double sigma = param(params, "sigma", 1.0);
        const double gamma = param(params, "gamma", 1.0);
        std::vector<std::string> a(d, "0"), b(d * d, "0"), c(d * d, "0");
        for (std::size_t i = 0; i < d; ++i) {
            b[i * d + i] = num(sigma);
            c[i * d + i] = num(gamma);
        }
        return CoefficientSystem::parse(d, d, d, a, b, c);
    }
    if (name == "geometric") {
        reject_unknown(name, params, {"mu", "sigma", "gamma"});
        const double mu = param(params, "mu", 0.0);
        const double sigma = param(params, "sigma", 1.0);
        const double gamma = param(params, "gamma", 0.0);
        return CoefficientSystem::parse(1, 1, 1, {num(mu) + "*x1"}, {num(sigma) + "*x1"}, {num(gamma) + "*x1"});
    }
    if (name == "heisenberg") {
        reject_unknown(name, params, {});
        return CoefficientSystem::parse(2, 1, 1, {"0", "0"}, {"1", "0"}, {"0", "x1"});
    }
    if (name == "degenerate") {
        reject_unknown(name, params, {});
        return CoefficientSystem::parse(2, 1, 1, {"-0.5*sin(x1)", "0"}, {"1", "0"}, {"0.5 + 0.25*cos(x1)", "0"});
    }
    if (name == "bounded-smooth") {
        reject_unknown(name, params, {});
        return CoefficientSystem::parse(2, 1, 1,
                                        {"0.5*cos(x2) - 0.5*tanh(x1)", "0.5*sin(x1) - 0.5*tanh(x2)"},
                                        {"0.6 + 0.2*sin(x2)", "0.2*cos(x1)"},
                                        {"0.2*cos(x2)", "0.5 + 0.2*tanh(x1)"});
    }
    throw Error("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    return {"additive", "geometric", "heisenberg", "degenerate", "bounded-smooth"};
}

AssumptionReport check_assumptions(const CoefficientSystem& sys, std::size_t points, double radius, double horizon,
                                   Rng& rng, double beta) {
    AssumptionReport report;
    const auto d = static_cast<Eigen::Index>(sys.d());
    std::vector<double> x(sys.d());
    Eigen::VectorXd a(d);
    Eigen::MatrixXd b(d, static_cast<Eigen::Index>(sys.m())), c(d, static_cast<Eigen::Index>(sys.l()));
    Eigen::MatrixXd jac(d, d);
    const double dt = horizon / 64.0;

    for (std::size_t p = 0; p < points; ++p) {
        for (auto& xi : x) xi = radius * (2.0 * rng.uniform() - 1.0);
        const double t = sys.time_dependent() ? horizon * rng.uniform() : 0.0;
        const double xnorm = Eigen::Map<const Eigen::VectorXd>(x.data(), d).norm();
        sys.eval_drift(t, x, a);
        sys.eval_wiener(t, x, b);
        sys.eval_fractional(t, x, c);
        const double na = a.norm(), nb = b.norm(), nc = c.norm();
        report.field_sup = std::max({report.field_sup, na, nb, nc});
        report.growth_constant = std::max(report.growth_constant, (na + nb + nc) / (1.0 + xnorm));

        std::vector<FieldRef> refs{{FieldKind::Drift, 0}};
        for (std::size_t k = 0; k < sys.m(); ++k) refs.push_back({FieldKind::Wiener, k});
        for (std::size_t q = 0; q < sys.l(); ++q) refs.push_back({FieldKind::Fractional, q});
        for (const auto& ref : refs) {
            sys.eval_jacobian(ref, t, x, jac);
            report.jacobian_sup = std::max(report.jacobian_sup, jac.operatorNorm());
        }

        if (sys.time_dependent()) {
            const double t2 = std::min(horizon, t + dt);
            if (t2 > t) {
                for (const auto& ref : refs) {
                    const double diff = (sys.eval_field(ref, t2, x) - sys.eval_field(ref, t, x)).norm();
                    report.time_holder =
                        std::max(report.time_holder, diff / (std::pow(t2 - t, beta) * (1.0 + xnorm)));
                }
            }
        }
    }
    if (!std::isfinite(report.growth_constant)) report.warnings.push_back("coefficients are not finite on the sample");
    if (report.jacobian_sup > 1e6) report.warnings.push_back("Jacobian norm is very large; Lipschitz bound doubtful");
    return report;
}

}  // namespace mixsde
