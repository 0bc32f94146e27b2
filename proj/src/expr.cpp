#include "mixsde/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "mixsde/error.hpp"

namespace mixsde {

namespace detail {

enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Exp, Log, Sqrt, Tanh };

using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind = Kind::Number;
    double value = 0.0;
    int variable = 0;
    Func func = Func::Sin;
    NodePtr lhs;
    NodePtr rhs;
};

enum class Op : unsigned char {
    Constant, Load, Negate, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt, Tanh
};

struct Instr {
    Op op;
    int variable;
    double value;
};

struct Program {
    std::vector<Instr> code;
    std::size_t max_depth = 0;
};

namespace {

constexpr std::array<std::string_view, 6> kFuncNames = {"sin", "cos", "exp", "log", "sqrt", "tanh"};

NodePtr number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->value = v;
    return n;
}

NodePtr var(int index) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->variable = index;
    return n;
}

NodePtr unary(Kind kind, NodePtr operand) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(operand);
    return n;
}

NodePtr binary(Kind kind, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

NodePtr call(Func f, NodePtr arg) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->func = f;
    n->lhs = std::move(arg);
    return n;
}

// ---- simplifying constructors (used for generated trees, never by the parser)

std::optional<double> literal(const NodePtr& n) {
    if (n->kind == Kind::Number) return n->value;
    if (n->kind == Kind::Negate && n->lhs->kind == Kind::Number) return -n->lhs->value;
    return std::nullopt;
}

bool is_literal(const NodePtr& n, double v) {
    auto lit = literal(n);
    return lit && *lit == v;
}

// Negative literals are stored as Negate(Number) so that printed trees re-parse identically.
NodePtr make_number(double v) {
    if (v < 0.0) return unary(Kind::Negate, number(-v));
    return number(v == 0.0 ? 0.0 : v);
}

std::optional<NodePtr> fold(double v) {
    if (!std::isfinite(v)) return std::nullopt;
    return make_number(v);
}

NodePtr s_neg(const NodePtr& a) {
    if (is_literal(a, 0.0)) return a;
    if (a->kind == Kind::Negate) return a->lhs;
    if (auto la = literal(a)) return make_number(-*la);
    return unary(Kind::Negate, a);
}

NodePtr s_add(const NodePtr& a, const NodePtr& b) {
    if (is_literal(a, 0.0)) return b;
    if (is_literal(b, 0.0)) return a;
    auto la = literal(a), lb = literal(b);
    if (la && lb)
        if (auto f = fold(*la + *lb)) return *f;
    return binary(Kind::Add, a, b);
}

NodePtr s_sub(const NodePtr& a, const NodePtr& b) {
    if (is_literal(b, 0.0)) return a;
    if (is_literal(a, 0.0)) return s_neg(b);
    auto la = literal(a), lb = literal(b);
    if (la && lb)
        if (auto f = fold(*la - *lb)) return *f;
    return binary(Kind::Sub, a, b);
}

NodePtr s_mul(const NodePtr& a, const NodePtr& b) {
    if (is_literal(a, 0.0) || is_literal(b, 0.0)) return number(0.0);
    if (is_literal(a, 1.0)) return b;
    if (is_literal(b, 1.0)) return a;
    if (is_literal(a, -1.0)) return s_neg(b);
    if (is_literal(b, -1.0)) return s_neg(a);
    auto la = literal(a), lb = literal(b);
    if (la && lb)
        if (auto f = fold(*la * *lb)) return *f;
    return binary(Kind::Mul, a, b);
}

NodePtr s_div(const NodePtr& a, const NodePtr& b) {
    if (is_literal(a, 0.0) && !is_literal(b, 0.0)) return number(0.0);
    if (is_literal(b, 1.0)) return a;
    auto la = literal(a), lb = literal(b);
    if (la && lb && *lb != 0.0)
        if (auto f = fold(*la / *lb)) return *f;
    return binary(Kind::Div, a, b);
}

NodePtr s_pow(const NodePtr& a, const NodePtr& b) {
    if (is_literal(b, 0.0)) return number(1.0);
    if (is_literal(b, 1.0)) return a;
    auto la = literal(a), lb = literal(b);
    if (la && lb)
        if (auto f = fold(std::pow(*la, *lb))) return *f;
    return binary(Kind::Pow, a, b);
}

double apply(Func f, double x) {
    switch (f) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Exp: return std::exp(x);
        case Func::Log: return std::log(x);
        case Func::Sqrt: return std::sqrt(x);
        case Func::Tanh: return std::tanh(x);
    }
    return 0.0;
}

NodePtr s_call(Func f, const NodePtr& a) {
    if (auto la = literal(a)) {
        const bool in_domain = (f != Func::Log || *la > 0.0) && (f != Func::Sqrt || *la >= 0.0);
        if (in_domain)
            if (auto r = fold(apply(f, *la))) return *r;
    }
    return call(f, a);
}

bool depends(const NodePtr& n, int index) {
    switch (n->kind) {
        case Kind::Number: return false;
        case Kind::Variable: return n->variable == index;
        case Kind::Negate:
        case Kind::Call: return depends(n->lhs, index);
        default: return depends(n->lhs, index) || depends(n->rhs, index);
    }
}

bool has_variable(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Number: return false;
        case Kind::Variable: return true;
        case Kind::Negate:
        case Kind::Call: return has_variable(n->lhs);
        default: return has_variable(n->lhs) || has_variable(n->rhs);
    }
}

NodePtr derive(const NodePtr& n, int v) {
    if (!depends(n, v)) return number(0.0);
    switch (n->kind) {
        case Kind::Number: return number(0.0);
        case Kind::Variable: return number(1.0);
        case Kind::Negate: return s_neg(derive(n->lhs, v));
        case Kind::Add: return s_add(derive(n->lhs, v), derive(n->rhs, v));
        case Kind::Sub: return s_sub(derive(n->lhs, v), derive(n->rhs, v));
        case Kind::Mul:
            return s_add(s_mul(derive(n->lhs, v), n->rhs), s_mul(n->lhs, derive(n->rhs, v)));
        case Kind::Div: {
            auto du = derive(n->lhs, v);
            auto dw = derive(n->rhs, v);
            auto first = s_div(du, n->rhs);
            auto second = s_div(s_mul(n->lhs, dw), s_pow(n->rhs, number(2.0)));
            return s_sub(first, second);
        }
        case Kind::Pow: {
            const auto& u = n->lhs;
            const auto& e = n->rhs;
            if (!depends(e, v)) {
                return s_mul(s_mul(e, s_pow(u, s_sub(e, number(1.0)))), derive(u, v));
            }
            if (!depends(u, v)) {
                return s_mul(s_mul(n, s_call(Func::Log, u)), derive(e, v));
            }
            auto inner = s_add(s_mul(derive(e, v), s_call(Func::Log, u)),
                               s_div(s_mul(e, derive(u, v)), u));
            return s_mul(n, inner);
        }
        case Kind::Call: {
            const auto& u = n->lhs;
            auto du = derive(u, v);
            switch (n->func) {
                case Func::Sin: return s_mul(s_call(Func::Cos, u), du);
                case Func::Cos: return s_neg(s_mul(s_call(Func::Sin, u), du));
                case Func::Exp: return s_mul(n, du);
                case Func::Log: return s_div(du, u);
                case Func::Sqrt: return s_div(du, s_mul(number(2.0), n));
                case Func::Tanh:
                    return s_mul(s_sub(number(1.0), s_pow(n, number(2.0))), du);
            }
        }
    }
    return number(0.0);
}

bool equal(const NodePtr& a, const NodePtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Kind::Number: return a->value == b->value;
        case Kind::Variable: return a->variable == b->variable;
        case Kind::Negate: return equal(a->lhs, b->lhs);
        case Kind::Call: return a->func == b->func && equal(a->lhs, b->lhs);
        default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    }
}

std::size_t count(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Number:
        case Kind::Variable: return 1;
        case Kind::Negate:
        case Kind::Call: return 1 + count(n->lhs);
        default: return 1 + count(n->lhs) + count(n->rhs);
    }
}

// ---- printing

int precedence(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Negate: return 3;
        case Kind::Pow: return 4;
        default: return 5;
    }
}

void print(const NodePtr& n, std::string& out);

void print_wrapped(const NodePtr& n, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print(n, out);
    if (wrap) out += ')';
}

void print(const NodePtr& n, std::string& out) {
    switch (n->kind) {
        case Kind::Number: {
            std::array<char, 32> buf{};
            auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n->value);
            out.append(buf.data(), res.ptr);
            return;
        }
        case Kind::Variable:
            if (n->variable == kTimeVariable)
                out += 't';
            else
                out += "x" + std::to_string(n->variable);
            return;
        case Kind::Call:
            out += kFuncNames[static_cast<std::size_t>(n->func)];
            out += '(';
            print(n->lhs, out);
            out += ')';
            return;
        case Kind::Negate:
            out += '-';
            print_wrapped(n->lhs, precedence(n->lhs) < 3, out);
            return;
        case Kind::Pow:
            print_wrapped(n->lhs, precedence(n->lhs) <= 4, out);
            out += '^';
            print_wrapped(n->rhs, precedence(n->rhs) < 3, out);
            return;
        default: {
            const int p = precedence(n);
            print_wrapped(n->lhs, precedence(n->lhs) < p, out);
            switch (n->kind) {
                case Kind::Add: out += " + "; break;
                case Kind::Sub: out += " - "; break;
                case Kind::Mul: out += '*'; break;
                default: out += '/'; break;
            }
            print_wrapped(n->rhs, precedence(n->rhs) <= p, out);
        }
    }
}

// ---- parsing

class Parser {
public:
    Parser(std::string_view src, int dimension, bool allow_time)
        : src_(src), dimension_(dimension), allow_time_(allow_time) {}

    NodePtr run() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
        auto n = expression();
        skip_space();
        if (pos_ < src_.size())
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return n;
    }

private:
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        auto lhs = product();
        for (;;) {
            if (accept('+'))
                lhs = binary(Kind::Add, lhs, product());
            else if (accept('-'))
                lhs = binary(Kind::Sub, lhs, product());
            else
                return lhs;
        }
    }

    NodePtr product() {
        auto lhs = unary_expr();
        for (;;) {
            if (accept('*'))
                lhs = binary(Kind::Mul, lhs, unary_expr());
            else if (accept('/'))
                lhs = binary(Kind::Div, lhs, unary_expr());
            else
                return lhs;
        }
    }

    NodePtr unary_expr() {
        if (accept('-')) return unary(Kind::Negate, unary_expr());
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept('^')) return binary(Kind::Pow, base, unary_expr());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        const std::size_t start = pos_;
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = expression();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
            if (res.ec != std::errc()) throw ParseError("malformed number", start);
            pos_ = static_cast<std::size_t>(res.ptr - src_.data());
            if (!std::isfinite(v)) throw ParseError("number out of range", start);
            return number(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            std::string_view name = src_.substr(start, pos_ - start);
            for (std::size_t f = 0; f < kFuncNames.size(); ++f) {
                if (name == kFuncNames[f]) {
                    if (!accept('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
                    auto arg = expression();
                    if (!accept(')')) throw ParseError("expected ')'", pos_);
                    return call(static_cast<Func>(f), arg);
                }
            }
            if (name == "t") {
                if (!allow_time_) throw ParseError("time variable 't' not allowed in an autonomous expression", start);
                return var(kTimeVariable);
            }
            if (name.size() > 1 && name[0] == 'x' &&
                name.substr(1).find_first_not_of("0123456789") == std::string_view::npos) {
                int index = 0;
                auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
                if (res.ec != std::errc() || index < 1 || index > dimension_)
                    throw ParseError("variable index out of range: " + std::string(name), start);
                return var(index);
            }
            throw ParseError("unknown identifier '" + std::string(name) + "'", start);
        }
        throw ParseError(std::string("unexpected '") + c + "'", start);
    }

    std::string_view src_;
    int dimension_;
    bool allow_time_;
    std::size_t pos_ = 0;
};

// ---- compilation to a postfix program

void emit(const NodePtr& n, Program& p, std::size_t depth) {
    auto push = [&](Instr i, std::size_t d) {
        p.code.push_back(i);
        p.max_depth = std::max(p.max_depth, d);
    };
    switch (n->kind) {
        case Kind::Number: push({Op::Constant, 0, n->value}, depth + 1); return;
        case Kind::Variable: push({Op::Load, n->variable, 0.0}, depth + 1); return;
        case Kind::Negate:
            emit(n->lhs, p, depth);
            push({Op::Negate, 0, 0.0}, depth + 1);
            return;
        case Kind::Call:
            emit(n->lhs, p, depth);
            push({static_cast<Op>(static_cast<int>(Op::Sin) + static_cast<int>(n->func)), 0, 0.0}, depth + 1);
            return;
        default: {
            emit(n->lhs, p, depth);
            emit(n->rhs, p, depth + 1);
            Op op = Op::Add;
            switch (n->kind) {
                case Kind::Sub: op = Op::Sub; break;
                case Kind::Mul: op = Op::Mul; break;
                case Kind::Div: op = Op::Div; break;
                case Kind::Pow: op = Op::Pow; break;
                default: break;
            }
            push({op, 0, 0.0}, depth + 1);
        }
    }
}

[[noreturn]] void domain_failure(const char* what) { throw DomainError(what); }

double run(const Program& p, std::span<const double> x, double t, double* stack) {
    std::size_t top = 0;
    for (const Instr& in : p.code) {
        switch (in.op) {
            case Op::Constant: stack[top++] = in.value; break;
            case Op::Load:
                stack[top++] = in.variable == kTimeVariable ? t : x[static_cast<std::size_t>(in.variable - 1)];
                break;
            case Op::Negate: stack[top - 1] = -stack[top - 1]; break;
            case Op::Add: --top; stack[top - 1] += stack[top]; break;
            case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::Div:
                --top;
                if (stack[top] == 0.0) domain_failure("division by zero");
                stack[top - 1] /= stack[top];
                break;
            case Op::Pow: {
                --top;
                const double base = stack[top - 1];
                const double ex = stack[top];
                if (base == 0.0 && ex < 0.0) domain_failure("division by zero in power");
                const double r = std::pow(base, ex);
                if (std::isnan(r)) domain_failure("negative base with non-integer exponent");
                if (!std::isfinite(r)) domain_failure("overflow in power");
                stack[top - 1] = r;
                break;
            }
            case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case Op::Exp:
                stack[top - 1] = std::exp(stack[top - 1]);
                if (!std::isfinite(stack[top - 1])) domain_failure("overflow in exp");
                break;
            case Op::Log:
                if (!(stack[top - 1] > 0.0)) domain_failure("log of non-positive argument");
                stack[top - 1] = std::log(stack[top - 1]);
                break;
            case Op::Sqrt:
                if (stack[top - 1] < 0.0) domain_failure("sqrt of negative argument");
                stack[top - 1] = std::sqrt(stack[top - 1]);
                break;
            case Op::Tanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
        }
    }
    const double r = stack[0];
    if (!std::isfinite(r)) domain_failure("non-finite result");
    return r;
}

}  // namespace
}  // namespace detail

using detail::NodePtr;

Expr::Expr() : Expr(detail::number(0.0), 1, false) {}

Expr::Expr(std::shared_ptr<const detail::Node> root, int dimension, bool allow_time)
    : root_(std::move(root)), dimension_(dimension), allow_time_(allow_time) {
    auto program = std::make_shared<detail::Program>();
    detail::emit(root_, *program, 0);
    program_ = std::move(program);
}

Expr Expr::parse(std::string_view source, int dimension, bool allow_time) {
    if (dimension < 1) throw Error("expression dimension must be positive");
    return Expr(detail::Parser(source, dimension, allow_time).run(), dimension, allow_time);
}

Expr Expr::constant(double value, int dimension, bool allow_time) {
    if (!std::isfinite(value)) throw DomainError("non-finite constant");
    return Expr(detail::make_number(value), dimension, allow_time);
}

Expr Expr::variable(int index, int dimension, bool allow_time) {
    if (index == kTimeVariable ? !allow_time : (index < 1 || index > dimension))
        throw Error("variable index out of range: " + std::to_string(index));
    return Expr(detail::var(index), dimension, allow_time);
}

double Expr::evaluate(std::span<const double> x, double t) const {
    if (static_cast<int>(x.size()) != dimension_)
        throw Error("point dimension " + std::to_string(x.size()) + " does not match expression dimension " +
                    std::to_string(dimension_));
    if (program_->max_depth <= 64) {
        std::array<double, 64> stack;
        return detail::run(*program_, x, t, stack.data());
    }
    std::vector<double> stack(program_->max_depth);
    return detail::run(*program_, x, t, stack.data());
}

Expr Expr::differentiate(int index) const {
    if (index == kTimeVariable ? !allow_time_ : (index < 1 || index > dimension_))
        throw Error("variable index out of range: " + std::to_string(index));
    return Expr(detail::derive(root_, index), dimension_, allow_time_);
}

bool Expr::depends_on(int index) const { return detail::depends(root_, index); }

bool Expr::is_zero() const { return detail::is_literal(root_, 0.0); }

bool Expr::is_constant() const { return !detail::has_variable(root_); }

std::string Expr::to_string() const {
    std::string out;
    detail::print(root_, out);
    return out;
}

bool Expr::same_structure(const Expr& other) const { return detail::equal(root_, other.root_); }

std::size_t Expr::node_count() const { return detail::count(root_); }

namespace {
void check_compatible(const Expr& a, const Expr& b) {
    if (a.dimension() != b.dimension()) throw Error("expression dimension mismatch");
}
}  // namespace

Expr operator+(const Expr& lhs, const Expr& rhs) {
    check_compatible(lhs, rhs);
    return Expr(detail::s_add(lhs.root_, rhs.root_), lhs.dimension_, lhs.allow_time_ || rhs.allow_time_);
}

Expr operator-(const Expr& lhs, const Expr& rhs) {
    check_compatible(lhs, rhs);
    return Expr(detail::s_sub(lhs.root_, rhs.root_), lhs.dimension_, lhs.allow_time_ || rhs.allow_time_);
}

Expr operator*(const Expr& lhs, const Expr& rhs) {
    check_compatible(lhs, rhs);
    return Expr(detail::s_mul(lhs.root_, rhs.root_), lhs.dimension_, lhs.allow_time_ || rhs.allow_time_);
}

Expr operator/(const Expr& lhs, const Expr& rhs) {
    check_compatible(lhs, rhs);
    return Expr(detail::s_div(lhs.root_, rhs.root_), lhs.dimension_, lhs.allow_time_ || rhs.allow_time_);
}

Expr operator-(const Expr& operand) {
    return Expr(detail::s_neg(operand.root_), operand.dimension_, operand.allow_time_);
}

Expr sum(const std::vector<Expr>& terms, int dimension, bool allow_time) {
    Expr total = Expr::constant(0.0, dimension, allow_time);
    for (const auto& term : terms) total = total + term;
    return total;
}

}  // namespace mixsde
