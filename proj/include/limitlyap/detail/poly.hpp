#pragma once

// Numeric multivariate polynomials over named atoms, used to put expressions
// into canonical form. Atoms are plain variables plus the opaque units
// "@cos" = cos(theta) and "@sin" = sin(theta); exponents may go negative for
// atoms marked Laurent (radial division).

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"

namespace limitlyap {
namespace detail {

using Monomial = std::map<std::string, int>;
using Poly = std::map<Monomial, double>;

inline void p_add_term(Poly& p, const Monomial& m, double c) {
    if (c == 0.0) return;
    auto [it, inserted] = p.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) p.erase(it);
    }
}

inline Poly p_const(double c) {
    Poly p;
    p_add_term(p, Monomial{}, c);
    return p;
}

inline Poly p_atom(const std::string& name) {
    Poly p;
    p_add_term(p, Monomial{{name, 1}}, 1.0);
    return p;
}

inline Poly p_add(const Poly& a, const Poly& b, double scale = 1.0) {
    Poly out = a;
    for (const auto& [m, c] : b) p_add_term(out, m, scale * c);
    return out;
}

inline Poly p_mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            Monomial m = ma;
            for (const auto& [name, e] : mb) {
                m[name] += e;
                if (m[name] == 0) m.erase(name);
            }
            p_add_term(out, m, ca * cb);
        }
    return out;
}

inline Poly p_scale(const Poly& a, double s) {
    Poly out;
    for (const auto& [m, c] : a) p_add_term(out, m, s * c);
    return out;
}

inline Poly p_pow(const Poly& a, int n) {
    Poly out = p_const(1.0);
    for (int i = 0; i < n; ++i) out = p_mul(out, a);
    return out;
}

// Drop coefficients below rel_tol of the largest magnitude (cancellation
// noise from trigonometric reduction); rel_tol 0 keeps everything.
inline void p_clean(Poly& p, double rel_tol) {
    if (rel_tol <= 0.0 || p.empty()) return;
    double maxc = 0.0;
    for (const auto& [m, c] : p) maxc = std::max(maxc, std::abs(c));
    for (auto it = p.begin(); it != p.end();) {
        if (std::abs(it->second) <= rel_tol * maxc)
            it = p.erase(it);
        else
            ++it;
    }
}

struct ExpandOptions {
    std::set<std::string> atoms;  // variables accepted as polynomial atoms
    bool trig_atoms = false;      // accept cos(theta)/sin(theta) as "@cos"/"@sin"
};

// Expand an expression into a Poly; throws expr/not-polynomial when the tree
// contains anything outside the atom algebra.
inline Poly expand_poly(const Expr& e, const ExpandOptions& opt) {
    switch (e.kind()) {
    case NodeKind::Constant:
        return p_const(e.value());
    case NodeKind::Variable:
        if (opt.atoms.count(e.name())) return p_atom(e.name());
        throw Error("expr/not-polynomial", "variable '" + e.name() + "' is not a polynomial atom");
    case NodeKind::Unary:
        switch (e.unary_op()) {
        case UnaryOp::Neg:
            return p_scale(expand_poly(e.child(), opt), -1.0);
        case UnaryOp::Cos:
            if (opt.trig_atoms && e.child().is_variable("theta")) return p_atom("@cos");
            break;
        case UnaryOp::Sin:
            if (opt.trig_atoms && e.child().is_variable("theta")) return p_atom("@sin");
            break;
        default:
            break;
        }
        throw Error("expr/not-polynomial", "non-polynomial function");
    case NodeKind::Binary:
        switch (e.binary_op()) {
        case BinaryOp::Add:
            return p_add(expand_poly(e.lhs(), opt), expand_poly(e.rhs(), opt));
        case BinaryOp::Sub:
            return p_add(expand_poly(e.lhs(), opt), expand_poly(e.rhs(), opt), -1.0);
        case BinaryOp::Mul:
            return p_mul(expand_poly(e.lhs(), opt), expand_poly(e.rhs(), opt));
        case BinaryOp::Div: {
            Poly den = expand_poly(e.rhs(), opt);
            if (den.size() == 1) {
                const auto& [m, c] = *den.begin();
                if (c == 0.0) throw Error("expr/not-polynomial", "division by zero");
                Poly num = expand_poly(e.lhs(), opt);
                Poly out;
                for (const auto& [mn, cn] : num) {
                    Monomial q = mn;
                    for (const auto& [name, exp] : m) {
                        q[name] -= exp;
                        if (q[name] == 0) q.erase(name);
                    }
                    p_add_term(out, q, cn / c);
                }
                return out;
            }
            throw Error("expr/not-polynomial", "division by a non-monomial");
        }
        case BinaryOp::Pow: {
            if (!e.rhs().is_constant() || !is_integer_value(e.rhs().value()))
                throw Error("expr/not-polynomial", "non-integer exponent");
            int n = static_cast<int>(e.rhs().value());
            Poly base = expand_poly(e.lhs(), opt);
            if (n >= 0) {
                if (n > 64) throw Error("expr/not-polynomial", "exponent too large");
                return p_pow(base, n);
            }
            if (base.size() == 1) {
                Poly out;
                const auto& [m, c] = *base.begin();
                Monomial q;
                for (const auto& [name, exp] : m) q[name] = exp * n;
                p_add_term(out, q, std::pow(c, n));
                return out;
            }
            throw Error("expr/not-polynomial", "negative power of a non-monomial");
        }
        }
    }
    throw Error("expr/not-polynomial", "unsupported node");
}

// Rewrite every sin^2 factor via sin^2 = 1 - cos^2 until sin-exponents are 0/1.
inline Poly reduce_sin_squares(const Poly& p) {
    Poly out;
    Poly pending = p;
    while (!pending.empty()) {
        Poly next;
        for (const auto& [m, c] : pending) {
            auto it = m.find("@sin");
            if (it == m.end() || it->second < 2) {
                p_add_term(out, m, c);
                continue;
            }
            Monomial base = m;
            base["@sin"] -= 2;
            if (base["@sin"] == 0) base.erase("@sin");
            // c * base * (1 - cos^2)
            p_add_term(next, base, c);
            Monomial with_cos = base;
            with_cos["@cos"] += 2;
            p_add_term(next, with_cos, -c);
        }
        pending = std::move(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Univariate helpers (coefficient vectors, index = degree) for content
// extraction. Coefficients come from machine arithmetic, so trimming and the
// Euclidean loop are tolerance-based.
// ---------------------------------------------------------------------------

using UniPoly = std::vector<double>;

inline void u_trim(UniPoly& p, double tol = 0.0) {
    while (!p.empty() && std::abs(p.back()) <= tol) p.pop_back();
}

inline int u_degree(const UniPoly& p) { return static_cast<int>(p.size()) - 1; }

inline double u_norm(const UniPoly& p) {
    double n = 0.0;
    for (double c : p) n = std::max(n, std::abs(c));
    return n;
}

inline UniPoly u_scale(UniPoly p, double s) {
    for (double& c : p) c *= s;
    return p;
}

// Remainder of a / b (b non-empty, leading coefficient nonzero).
inline UniPoly u_mod(UniPoly a, const UniPoly& b) {
    int db = u_degree(b);
    while (u_degree(a) >= db) {
        double q = a.back() / b.back();
        int shift = u_degree(a) - db;
        for (int i = 0; i <= db; ++i) a[i + shift] -= q * b[i];
        a.pop_back();
    }
    return a;
}

// Exact-division check: a = q*b with remainder below tol. Returns success.
inline bool u_divide(const UniPoly& a, const UniPoly& b, UniPoly& q, double tol) {
    if (b.empty()) return false;
    UniPoly rem = a;
    int db = u_degree(b);
    int dq = u_degree(a) - db;
    if (dq < 0) return false;
    q.assign(dq + 1, 0.0);
    for (int i = dq; i >= 0; --i) {
        double c = rem[i + db] / b.back();
        q[i] = c;
        for (int j = 0; j <= db; ++j) rem[i + j] -= c * b[j];
    }
    double scale = std::max(1.0, u_norm(a));
    for (double c : rem)
        if (std::abs(c) > tol * scale) return false;
    return true;
}

// Monic GCD via Euclid with tolerance-based remainder trimming. Returns {1}
// when the inputs share no factor (or the arithmetic is too noisy to tell).
inline UniPoly u_gcd(UniPoly a, UniPoly b, double tol = 1e-9) {
    u_trim(a, tol * u_norm(a));
    u_trim(b, tol * u_norm(b));
    if (a.empty()) std::swap(a, b);
    if (b.empty()) {
        if (a.empty()) return {};
        return u_scale(a, 1.0 / a.back());
    }
    while (!b.empty()) {
        UniPoly r = u_mod(a, b);
        u_trim(r, tol * std::max(u_norm(a), 1.0));
        if (!r.empty()) r = u_scale(std::move(r), 1.0 / u_norm(r));
        a = std::move(b);
        b = std::move(r);
    }
    return u_scale(a, 1.0 / a.back());
}

// ---------------------------------------------------------------------------
// Canonical emission: deterministic monomial order (total degree, then
// exponents lexicographically in the given atom order).
// ---------------------------------------------------------------------------

inline Expr atom_expr(const std::string& name) {
    if (name == "@cos") return cos(Expr::variable("theta"));
    if (name == "@sin") return sin(Expr::variable("theta"));
    return Expr::variable(name);
}

inline Expr emit_term(double coeff, const Monomial& m, const std::vector<std::string>& order) {
    Expr prod;
    bool have = false;
    for (const auto& name : order) {
        auto it = m.find(name);
        if (it == m.end() || it->second == 0) continue;
        Expr base = atom_expr(name);
        Expr part = it->second == 1 ? base : pow(base, static_cast<double>(it->second));
        prod = have ? prod * part : part;
        have = true;
    }
    if (!have) return Expr::constant(coeff);
    if (coeff == 1.0) return prod;
    if (coeff == -1.0) return -prod;
    return Expr::constant(coeff) * prod;
}

inline Expr emit_poly(const Poly& p, const std::vector<std::string>& order) {
    if (p.empty()) return Expr::constant(0.0);

    std::vector<std::pair<Monomial, double>> terms(p.begin(), p.end());
    auto exponents = [&](const Monomial& m) {
        std::vector<int> e;
        e.reserve(order.size());
        int total = 0;
        for (const auto& name : order) {
            auto it = m.find(name);
            int v = it == m.end() ? 0 : it->second;
            e.push_back(v);
            total += v;
        }
        e.insert(e.begin(), total);
        return e;
    };
    std::sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
        return exponents(a.first) < exponents(b.first);
    });

    Expr out;
    bool first = true;
    for (const auto& [m, c] : terms) {
        if (first) {
            out = emit_term(c, m, order);
            first = false;
        } else if (c < 0.0) {
            out = out - emit_term(-c, m, order);
        } else {
            out = out + emit_term(c, m, order);
        }
    }
    return out;
}

} // namespace detail
} // namespace limitlyap
