#pragma once

// Symbolic expression trees over the variables {x, y, r, theta}:
// parsing, evaluation, differentiation, polynomial antiderivatives,
// structural simplification and pointwise comparison.
//
// Expressions are immutable once built; copies share nodes and may be
// evaluated concurrently.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "limitlyap/error.hpp"

namespace limitlyap {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class NodeKind { Constant, Variable, Unary, Binary };
enum class UnaryOp { Neg, Sin, Cos, Exp, Ln, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

class Expr {
public:
    // Default-constructed expression is the constant 0.
    Expr() : node_(zero_node()) {}

    static Expr constant(double v) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Constant;
        n->value = v;
        return Expr(std::move(n));
    }

    static Expr variable(const std::string& name) {
        if (name != "x" && name != "y" && name != "r" && name != "theta")
            throw Error("expr/unknown-identifier", "unknown variable '" + name + "'");
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Variable;
        n->name = name;
        return Expr(std::move(n));
    }

    static Expr unary(UnaryOp op, Expr a) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Unary;
        n->uop = op;
        n->a = a.node_;
        return Expr(std::move(n));
    }

    static Expr binary(BinaryOp op, Expr a, Expr b) {
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Binary;
        n->bop = op;
        n->a = a.node_;
        n->b = b.node_;
        return Expr(std::move(n));
    }

    NodeKind kind() const { return node_->kind; }
    double value() const { return node_->value; }
    const std::string& name() const { return node_->name; }
    UnaryOp unary_op() const { return node_->uop; }
    BinaryOp binary_op() const { return node_->bop; }
    Expr child() const { return Expr(node_->a); }
    Expr lhs() const { return Expr(node_->a); }
    Expr rhs() const { return Expr(node_->b); }

    bool is_constant() const { return node_->kind == NodeKind::Constant; }
    bool is_constant(double v) const { return is_constant() && node_->value == v; }
    bool is_variable(const std::string& n) const {
        return node_->kind == NodeKind::Variable && node_->name == n;
    }

    bool same_node(const Expr& o) const { return node_ == o.node_; }

private:
    struct Node {
        NodeKind kind = NodeKind::Constant;
        double value = 0.0;
        std::string name;
        UnaryOp uop = UnaryOp::Neg;
        BinaryOp bop = BinaryOp::Add;
        std::shared_ptr<const Node> a, b;
    };
    using NodePtr = std::shared_ptr<const Node>;

    explicit Expr(NodePtr n) : node_(std::move(n)) {}

    static const NodePtr& zero_node() {
        static const NodePtr z = [] {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Constant;
            n->value = 0.0;
            return NodePtr(n);
        }();
        return z;
    }

    NodePtr node_;
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Div, a, b); }
inline Expr operator-(const Expr& a) { return Expr::unary(UnaryOp::Neg, a); }
inline Expr pow(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Pow, a, b); }
inline Expr pow(const Expr& a, double e) { return pow(a, Expr::constant(e)); }
inline Expr sin(const Expr& a) { return Expr::unary(UnaryOp::Sin, a); }
inline Expr cos(const Expr& a) { return Expr::unary(UnaryOp::Cos, a); }
inline Expr exp(const Expr& a) { return Expr::unary(UnaryOp::Exp, a); }
inline Expr ln(const Expr& a) { return Expr::unary(UnaryOp::Ln, a); }
inline Expr sqrt(const Expr& a) { return Expr::unary(UnaryOp::Sqrt, a); }

// Variable assignments used by evaluate(). Every free variable of the
// expression must be bound.
class Bindings {
public:
    Bindings() = default;

    Bindings& set(const std::string& name, double v) {
        values_[name] = v;
        return *this;
    }

    const double* find(const std::string& name) const {
        auto it = values_.find(name);
        return it == values_.end() ? nullptr : &it->second;
    }

    static Bindings xy(double x, double y) { return Bindings().set("x", x).set("y", y); }
    static Bindings polar(double r, double theta) {
        return Bindings().set("r", r).set("theta", theta);
    }

private:
    std::map<std::string, double> values_;
};

namespace detail {

inline bool is_integer_value(double v) {
    return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e9;
}

} // namespace detail

inline double evaluate(const Expr& e, const Bindings& b) {
    switch (e.kind()) {
    case NodeKind::Constant:
        return e.value();
    case NodeKind::Variable: {
        const double* v = b.find(e.name());
        if (!v) throw Error("expr/unbound-variable", "variable '" + e.name() + "' is not bound");
        return *v;
    }
    case NodeKind::Unary: {
        double a = evaluate(e.child(), b);
        switch (e.unary_op()) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Cos: return std::cos(a);
        case UnaryOp::Exp: return std::exp(a);
        case UnaryOp::Ln:
            if (a <= 0.0) throw Error("expr/domain", "ln of non-positive value");
            return std::log(a);
        case UnaryOp::Sqrt:
            if (a < 0.0) throw Error("expr/domain", "sqrt of negative value");
            return std::sqrt(a);
        }
        break;
    }
    case NodeKind::Binary: {
        double a = evaluate(e.lhs(), b);
        double c = evaluate(e.rhs(), b);
        switch (e.binary_op()) {
        case BinaryOp::Add: return a + c;
        case BinaryOp::Sub: return a - c;
        case BinaryOp::Mul: return a * c;
        case BinaryOp::Div:
            if (c == 0.0) throw Error("expr/domain", "division by zero");
            return a / c;
        case BinaryOp::Pow:
            if (!detail::is_integer_value(c)) {
                if (a <= 0.0)
                    throw Error("expr/domain", "non-integer power of non-positive base");
            } else if (a == 0.0 && c < 0.0) {
                throw Error("expr/domain", "zero raised to negative power");
            }
            return std::pow(a, c);
        }
        break;
    }
    }
    throw Error("expr/internal", "unreachable node kind");
}

inline void collect_free_vars(const Expr& e, std::set<std::string>& out) {
    switch (e.kind()) {
    case NodeKind::Constant: return;
    case NodeKind::Variable: out.insert(e.name()); return;
    case NodeKind::Unary: collect_free_vars(e.child(), out); return;
    case NodeKind::Binary:
        collect_free_vars(e.lhs(), out);
        collect_free_vars(e.rhs(), out);
        return;
    }
}

inline std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    collect_free_vars(e, out);
    return out;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.same_node(b)) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case NodeKind::Constant: return a.value() == b.value();
    case NodeKind::Variable: return a.name() == b.name();
    case NodeKind::Unary:
        return a.unary_op() == b.unary_op() && structurally_equal(a.child(), b.child());
    case NodeKind::Binary:
        return a.binary_op() == b.binary_op() && structurally_equal(a.lhs(), b.lhs()) &&
               structurally_equal(a.rhs(), b.rhs());
    }
    return false;
}

// Simultaneous substitution of variables by expressions.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& subs) {
    switch (e.kind()) {
    case NodeKind::Constant: return e;
    case NodeKind::Variable: {
        auto it = subs.find(e.name());
        return it == subs.end() ? e : it->second;
    }
    case NodeKind::Unary: return Expr::unary(e.unary_op(), substitute(e.child(), subs));
    case NodeKind::Binary:
        return Expr::binary(e.binary_op(), substitute(e.lhs(), subs), substitute(e.rhs(), subs));
    }
    return e;
}

// Constant folding plus the unit identities (e+0, e*1, e*0, e^1, e^0, e/1,
// double negation). Idempotent: a second pass leaves the tree unchanged.
inline Expr simplify(const Expr& e) {
    switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Variable:
        return e;
    case NodeKind::Unary: {
        Expr a = simplify(e.child());
        if (a.is_constant()) {
            try {
                return Expr::constant(evaluate(Expr::unary(e.unary_op(), a), Bindings()));
            } catch (const Error&) {
                // out-of-domain constant; keep the node so evaluation reports it
            }
        }
        if (e.unary_op() == UnaryOp::Neg && a.kind() == NodeKind::Unary &&
            a.unary_op() == UnaryOp::Neg)
            return a.child();
        return a.same_node(e.child()) ? e : Expr::unary(e.unary_op(), a);
    }
    case NodeKind::Binary: {
        Expr a = simplify(e.lhs());
        Expr b = simplify(e.rhs());
        if (a.is_constant() && b.is_constant()) {
            try {
                return Expr::constant(evaluate(Expr::binary(e.binary_op(), a, b), Bindings()));
            } catch (const Error&) {
            }
        }
        switch (e.binary_op()) {
        case BinaryOp::Add:
            if (a.is_constant(0.0)) return b;
            if (b.is_constant(0.0)) return a;
            break;
        case BinaryOp::Sub:
            if (b.is_constant(0.0)) return a;
            if (a.is_constant(0.0)) return Expr::unary(UnaryOp::Neg, b);
            break;
        case BinaryOp::Mul:
            if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
            if (a.is_constant(1.0)) return b;
            if (b.is_constant(1.0)) return a;
            break;
        case BinaryOp::Div:
            if (b.is_constant(1.0)) return a;
            if (a.is_constant(0.0)) return Expr::constant(0.0);
            break;
        case BinaryOp::Pow:
            if (b.is_constant(1.0)) return a;
            if (b.is_constant(0.0)) return Expr::constant(1.0);
            if (a.is_constant(1.0)) return Expr::constant(1.0);
            break;
        }
        if (a.same_node(e.lhs()) && b.same_node(e.rhs())) return e;
        return Expr::binary(e.binary_op(), a, b);
    }
    }
    return e;
}

namespace detail {

inline Expr diff_impl(const Expr& e, const std::string& var) {
    switch (e.kind()) {
    case NodeKind::Constant:
        return Expr::constant(0.0);
    case NodeKind::Variable:
        return Expr::constant(e.name() == var ? 1.0 : 0.0);
    case NodeKind::Unary: {
        Expr u = e.child();
        Expr du = diff_impl(u, var);
        switch (e.unary_op()) {
        case UnaryOp::Neg: return -du;
        case UnaryOp::Sin: return cos(u) * du;
        case UnaryOp::Cos: return -(sin(u) * du);
        case UnaryOp::Exp: return exp(u) * du;
        case UnaryOp::Ln: return du / u;
        case UnaryOp::Sqrt: return du / (Expr::constant(2.0) * sqrt(u));
        }
        break;
    }
    case NodeKind::Binary: {
        Expr u = e.lhs(), v = e.rhs();
        Expr du = diff_impl(u, var), dv = diff_impl(v, var);
        switch (e.binary_op()) {
        case BinaryOp::Add: return du + dv;
        case BinaryOp::Sub: return du - dv;
        case BinaryOp::Mul: return du * v + u * dv;
        case BinaryOp::Div: return (du * v - u * dv) / (v * v);
        case BinaryOp::Pow:
            if (v.is_constant()) {
                double c = v.value();
                return Expr::constant(c) * pow(u, c - 1.0) * du;
            }
            // u^v = exp(v ln u); valid for positive bases, which evaluate()
            // enforces for non-integer exponents anyway.
            return pow(u, v) * (dv * ln(u) + v * du / u);
        }
        break;
    }
    }
    throw Error("expr/internal", "unreachable node kind");
}

} // namespace detail

inline Expr differentiate(const Expr& e, const std::string& var) {
    return simplify(detail::diff_impl(e, var));
}

// ---------------------------------------------------------------------------
// Parsing
//
// Grammar (whitespace-insensitive):
//   expression := term { ('+'|'-') term }
//   term       := factor { ('*'|'/') factor }
//   factor     := '-' factor | power
//   power      := atom [ '^' factor ]          -- right-associative, binds tightest
//   atom       := number | ident | ident '(' expression ')' | '(' expression ')'
// Identifiers: variables x y r theta; functions sin cos exp ln sqrt.
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    Expr parse() {
        Expr e = expression();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return e;
    }

private:
    Expr expression() {
        Expr e = term();
        for (;;) {
            skip_ws();
            if (peek() == '+') {
                ++pos_;
                e = e + term();
            } else if (peek() == '-') {
                ++pos_;
                e = e - term();
            } else {
                return e;
            }
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            skip_ws();
            if (peek() == '*') {
                ++pos_;
                e = e * factor();
            } else if (peek() == '/') {
                ++pos_;
                e = e / factor();
            } else {
                return e;
            }
        }
    }

    Expr factor() {
        skip_ws();
        if (peek() == '-') {
            ++pos_;
            return -factor();
        }
        return power();
    }

    Expr power() {
        Expr base = atom();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            return pow(base, factor());
        }
        return base;
    }

    Expr atom() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = expression();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return identifier();
        fail(c == '\0' ? "unexpected end of input" : std::string("unexpected character '") + c + "'");
    }

    Expr number() {
        size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            size_t mark = pos_;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            } else {
                pos_ = mark; // 'e' was not an exponent
            }
        }
        try {
            return Expr::constant(std::stod(text_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            pos_ = start;
            fail("malformed number literal");
        }
    }

    Expr identifier() {
        size_t start = pos_;
        while (std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        skip_ws();
        if (peek() == '(') {
            UnaryOp op;
            if (name == "sin") op = UnaryOp::Sin;
            else if (name == "cos") op = UnaryOp::Cos;
            else if (name == "exp") op = UnaryOp::Exp;
            else if (name == "ln") op = UnaryOp::Ln;
            else if (name == "sqrt") op = UnaryOp::Sqrt;
            else {
                pos_ = start;
                fail("unknown function '" + name + "'");
            }
            ++pos_;
            Expr arg = expression();
            expect(')');
            return Expr::unary(op, arg);
        }
        if (name == "x" || name == "y" || name == "r" || name == "theta")
            return Expr::variable(name);
        pos_ = start;
        fail("unknown identifier '" + name + "'");
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error("expr/syntax",
                    what + " at position " + std::to_string(pos_ + 1) + " in \"" + text_ + "\"");
    }

    const std::string& text_;
    size_t pos_ = 0;
};

} // namespace detail

inline Expr parse(const std::string& text) {
    detail::Parser p(text);
    return p.parse();
}

// ---------------------------------------------------------------------------
// Printing: fully parenthesized infix, stable across versions. Constants use
// 17 significant digits so parse(print(e)) evaluates identically to e.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string print(const Expr& e) {
    switch (e.kind()) {
    case NodeKind::Constant:
        return format_double(e.value());
    case NodeKind::Variable:
        return e.name();
    case NodeKind::Unary: {
        std::string a = print(e.child());
        switch (e.unary_op()) {
        case UnaryOp::Neg: return "(-" + a + ")";
        case UnaryOp::Sin: return "sin(" + a + ")";
        case UnaryOp::Cos: return "cos(" + a + ")";
        case UnaryOp::Exp: return "exp(" + a + ")";
        case UnaryOp::Ln: return "ln(" + a + ")";
        case UnaryOp::Sqrt: return "sqrt(" + a + ")";
        }
        break;
    }
    case NodeKind::Binary: {
        const char* op = "?";
        switch (e.binary_op()) {
        case BinaryOp::Add: op = " + "; break;
        case BinaryOp::Sub: op = " - "; break;
        case BinaryOp::Mul: op = " * "; break;
        case BinaryOp::Div: op = " / "; break;
        case BinaryOp::Pow: op = " ^ "; break;
        }
        return "(" + print(e.lhs()) + op + print(e.rhs()) + ")";
    }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Polynomial antiderivative. The expression is expanded as a polynomial in
// `var` with expression-valued coefficients (other variables are constants).
// ---------------------------------------------------------------------------

namespace detail {

// Coefficient list indexed by power of `var`; throws expr/not-polynomial.
inline std::vector<Expr> expand_univariate(const Expr& e, const std::string& var) {
    auto depends = [&](const Expr& t) { return free_vars(t).count(var) > 0; };
    if (!depends(e)) return {e};

    switch (e.kind()) {
    case NodeKind::Variable:
        return {Expr::constant(0.0), Expr::constant(1.0)};
    case NodeKind::Unary: {
        if (e.unary_op() == UnaryOp::Neg) {
            auto c = expand_univariate(e.child(), var);
            for (auto& t : c) t = simplify(-t);
            return c;
        }
        throw Error("expr/not-polynomial",
                    "transcendental function of '" + var + "' is not a polynomial");
    }
    case NodeKind::Binary: {
        switch (e.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: {
            auto a = expand_univariate(e.lhs(), var);
            auto b = expand_univariate(e.rhs(), var);
            if (b.size() > a.size()) a.resize(b.size(), Expr::constant(0.0));
            for (size_t i = 0; i < b.size(); ++i)
                a[i] = simplify(e.binary_op() == BinaryOp::Add ? a[i] + b[i] : a[i] - b[i]);
            return a;
        }
        case BinaryOp::Mul: {
            auto a = expand_univariate(e.lhs(), var);
            auto b = expand_univariate(e.rhs(), var);
            std::vector<Expr> out(a.size() + b.size() - 1, Expr::constant(0.0));
            for (size_t i = 0; i < a.size(); ++i)
                for (size_t j = 0; j < b.size(); ++j)
                    out[i + j] = simplify(out[i + j] + a[i] * b[j]);
            return out;
        }
        case BinaryOp::Div: {
            if (depends(e.rhs()))
                throw Error("expr/not-polynomial",
                            "division by an expression containing '" + var + "'");
            auto a = expand_univariate(e.lhs(), var);
            for (auto& t : a) t = simplify(t / e.rhs());
            return a;
        }
        case BinaryOp::Pow: {
            if (!e.rhs().is_constant() || !is_integer_value(e.rhs().value()) ||
                e.rhs().value() < 0.0)
                throw Error("expr/not-polynomial",
                            "non-integer or negative power of '" + var + "'");
            int n = static_cast<int>(e.rhs().value());
            if (n > 64)
                throw Error("expr/not-polynomial", "polynomial power too large");
            std::vector<Expr> out{Expr::constant(1.0)};
            auto base = expand_univariate(e.lhs(), var);
            for (int k = 0; k < n; ++k) {
                std::vector<Expr> next(out.size() + base.size() - 1, Expr::constant(0.0));
                for (size_t i = 0; i < out.size(); ++i)
                    for (size_t j = 0; j < base.size(); ++j)
                        next[i + j] = simplify(next[i + j] + out[i] * base[j]);
                out = std::move(next);
            }
            return out;
        }
        }
        break;
    }
    default:
        break;
    }
    throw Error("expr/not-polynomial", "expression is not polynomial in '" + var + "'");
}

} // namespace detail

// Term-by-term antiderivative with zero constant of integration.
inline Expr antiderivative_poly(const Expr& e, const std::string& var) {
    auto coeffs = detail::expand_univariate(simplify(e), var);
    Expr v = Expr::variable(var);
    Expr out = Expr::constant(0.0);
    bool first = true;
    for (size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k].is_constant(0.0)) continue;
        double p = static_cast<double>(k) + 1.0;
        Expr mono = (k == 0) ? v : pow(v, p);
        Expr term = simplify(simplify(coeffs[k] / Expr::constant(p)) * mono);
        out = first ? term : simplify(out + term);
        first = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pointwise equality on a grid: |a-b| <= 1e-12 * (1 + |a|) at every point.
// Default grid: 21 points per variable over [-2, 2].
// ---------------------------------------------------------------------------

inline bool poly_equal(const Expr& a, const Expr& b, std::vector<std::string> vars = {},
                       int points = 21, double lo = -2.0, double hi = 2.0) {
    if (vars.empty()) {
        std::set<std::string> u = free_vars(a);
        for (const auto& v : free_vars(b)) u.insert(v);
        vars.assign(u.begin(), u.end());
    }
    if (vars.empty()) {
        double va = evaluate(a, Bindings());
        double vb = evaluate(b, Bindings());
        return std::abs(va - vb) <= 1e-12 * (1.0 + std::abs(va));
    }
    size_t dims = vars.size();
    std::vector<int> idx(dims, 0);
    Bindings bind;
    for (;;) {
        for (size_t d = 0; d < dims; ++d) {
            double t = points > 1 ? static_cast<double>(idx[d]) / (points - 1) : 0.5;
            bind.set(vars[d], lo + (hi - lo) * t);
        }
        double va = evaluate(a, bind);
        double vb = evaluate(b, bind);
        if (!(std::abs(va - vb) <= 1e-12 * (1.0 + std::abs(va)))) return false;
        size_t d = 0;
        while (d < dims && ++idx[d] == points) idx[d++] = 0;
        if (d == dims) break;
    }
    return true;
}

} // namespace limitlyap
