#pragma once

// Arithmetic expressions over x1..xd (and optionally t) with exact symbolic
// differentiation.
//
// Grammar, highest precedence first:
//   primary  := number | x<k> | t | func '(' expr ')' | '(' expr ')'
//   power    := primary [ '^' unary ]          (right-associative)
//   unary    := '-' unary | power
//   product  := unary { ('*' | '/') unary }
//   expr     := product { ('+' | '-') product }
// func is one of sin, cos, exp, log, sqrt, tanh.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixsde {

namespace detail {
struct Node;
struct Program;
}  // namespace detail

/// Index of the reserved time variable `t`; state variables x1..xd use 1..d.
inline constexpr int kTimeVariable = 0;

class Expr {
public:
    /// The constant zero in dimension 1.
    Expr();

    /// Parses `source` over x1..x`dimension`. `allow_time` admits the reserved variable t.
    static Expr parse(std::string_view source, int dimension, bool allow_time = false);
    static Expr constant(double value, int dimension, bool allow_time = false);
    /// The coordinate function x`index` (or t for kTimeVariable).
    static Expr variable(int index, int dimension, bool allow_time = false);

    int dimension() const noexcept { return dimension_; }
    bool allows_time() const noexcept { return allow_time_; }

    /// Evaluates at state `x` (size must equal dimension()) and time `t`.
    /// Throws DomainError instead of returning a non-finite value.
    double evaluate(std::span<const double> x, double t = 0.0) const;

    /// Exact partial derivative with respect to variable `index` (1..d, or kTimeVariable).
    Expr differentiate(int index) const;

    bool depends_on(int index) const;
    /// True when the tree is the literal 0.
    bool is_zero() const;
    /// True when no variable occurs in the tree.
    bool is_constant() const;

    /// Prints with the minimal parentheses that re-parse to the same tree.
    std::string to_string() const;

    /// Structural equality of the syntax trees.
    bool same_structure(const Expr& other) const;

    std::size_t node_count() const;

    friend Expr operator+(const Expr& lhs, const Expr& rhs);
    friend Expr operator-(const Expr& lhs, const Expr& rhs);
    friend Expr operator*(const Expr& lhs, const Expr& rhs);
    friend Expr operator/(const Expr& lhs, const Expr& rhs);
    friend Expr operator-(const Expr& operand);

private:
    Expr(std::shared_ptr<const detail::Node> root, int dimension, bool allow_time);

    std::shared_ptr<const detail::Node> root_;
    std::shared_ptr<const detail::Program> program_;
    int dimension_ = 1;
    bool allow_time_ = false;
};

/// Sums a list of expressions, skipping literal zeros.
Expr sum(const std::vector<Expr>& terms, int dimension, bool allow_time = false);

}  // namespace mixsde
