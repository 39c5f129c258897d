#pragma once

// Planar systems in Cartesian and polar coordinates: conversion, radial-form
// classification, and triangular coordinate transforms.

#include <array>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "limitlyap/detail/poly.hpp"
#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"

namespace limitlyap {

struct Window {
    double xmin = -2.0, xmax = 2.0, ymin = -2.0, ymax = 2.0;
};

namespace detail {

inline void require_vars(const Expr& e, const std::set<std::string>& allowed,
                         const std::string& code, const std::string& what) {
    for (const auto& v : free_vars(e))
        if (!allowed.count(v))
            throw Error(code, what + " may not contain variable '" + v + "'");
}

} // namespace detail

struct PlanarSystem {
    Expr fx, fy; // right-hand sides in (x, y)

    PlanarSystem() = default;
    PlanarSystem(Expr fx_, Expr fy_) : fx(std::move(fx_)), fy(std::move(fy_)) {
        detail::require_vars(fx, {"x", "y"}, "system/invalid-variables", "fx");
        detail::require_vars(fy, {"x", "y"}, "system/invalid-variables", "fy");
    }
};

struct PolarSystem {
    Expr rdot, thetadot; // right-hand sides in (r, theta), defined for r > 0

    PolarSystem() = default;
    PolarSystem(Expr rdot_, Expr thetadot_)
        : rdot(std::move(rdot_)), thetadot(std::move(thetadot_)) {
        detail::require_vars(rdot, {"r", "theta"}, "system/invalid-variables", "rdot");
        detail::require_vars(thetadot, {"r", "theta"}, "system/invalid-variables", "thetadot");
    }
};

enum class RadialKind { PureRadial, Separable, Coupled, Unclassified };

inline const char* to_string(RadialKind k) {
    switch (k) {
    case RadialKind::PureRadial: return "pure-radial";
    case RadialKind::Separable: return "separable";
    case RadialKind::Coupled: return "coupled";
    case RadialKind::Unclassified: return "unclassified";
    }
    return "?";
}

struct RadialForm {
    RadialKind kind = RadialKind::Unclassified;
    Expr upsilon0 = Expr::constant(1.0);  // radial factor of rdot
    std::optional<Expr> upsilon1;         // theta-only factor (Separable)
    std::optional<Expr> upsilon2;         // mixed factor (Coupled)
    Expr psi;                             // thetadot
    std::string diagnostic;
};

// A coordinate change with both directions as expressions in (x, y); the
// inverse expressions read their arguments as the transformed variables.
struct Transform {
    std::array<Expr, 2> forward; // (u(x,y), v(x,y))
    std::array<Expr, 2> inverse; // (x(u,v), y(u,v))
};

// ---------------------------------------------------------------------------
// to_polar: uses   rdot = cos(theta) fx + sin(theta) fy
//           thetadot = (cos(theta) fy - sin(theta) fx) / r
// with x = r cos(theta), y = r sin(theta) substituted. For polynomial fields
// the result is put in canonical form: monomials in (r, cos, sin) reduced via
// sin^2 = 1 - cos^2, with rdot factored as radial part x theta monomial x
// primitive mixed part so that classification can read the structure off
// the product tree.
// ---------------------------------------------------------------------------

namespace detail {

struct PolarSplit {
    Poly radial;    // polynomial in r alone (monomial content folded in)
    Monomial trig;  // pure @cos/@sin monomial factor
    Poly mixed;     // primitive remaining part (possibly constant 1)
};

// Factor p = radial(r) * trig * mixed. Content extraction uses univariate
// GCD of the r-coefficient polynomials; when the arithmetic is inconclusive
// the content falls back to the bare monomial and everything stays in mixed.
inline PolarSplit split_radial(const Poly& p) {
    PolarSplit out;
    out.radial = p_const(1.0);
    out.mixed = p_const(1.0);
    if (p.empty()) {
        out.radial = Poly{}; // zero
        return out;
    }

    // 1. per-atom minimum exponent -> monomial factor
    std::map<std::string, int> mins;
    bool first = true;
    for (const auto& [m, c] : p) {
        if (first) {
            mins["r"] = mins["@cos"] = mins["@sin"] = 1 << 20;
            first = false;
        }
        for (auto& [name, lo] : mins) {
            auto it = m.find(name);
            lo = std::min(lo, it == m.end() ? 0 : it->second);
        }
    }
    Poly shifted;
    for (const auto& [m, c] : p) {
        Monomial q = m;
        for (const auto& [name, lo] : mins) {
            q[name] -= lo;
            if (q[name] == 0) q.erase(name);
        }
        shifted[q] = c;
    }
    int r_mono = mins["r"];
    out.trig.clear();
    if (mins["@cos"] != 0) out.trig["@cos"] = mins["@cos"];
    if (mins["@sin"] != 0) out.trig["@sin"] = mins["@sin"];

    // 2. group by trig part; content = gcd of the r-coefficient polynomials
    std::map<Monomial, UniPoly> groups;
    for (const auto& [m, c] : shifted) {
        Monomial trig_part;
        int rdeg = 0;
        for (const auto& [name, e] : m) {
            if (name == "r")
                rdeg = e;
            else
                trig_part[name] = e;
        }
        UniPoly& u = groups[trig_part];
        if (static_cast<int>(u.size()) <= rdeg) u.resize(rdeg + 1, 0.0);
        u[rdeg] += c;
    }
    UniPoly content;
    for (auto& [m, u] : groups) {
        u_trim(u, 1e-13 * u_norm(u));
        content = content.empty() ? u_gcd(u, u) : u_gcd(content, u);
    }
    if (content.empty()) content = {1.0};

    // 3. divide out the content; bail to trivial content if inexact
    std::map<Monomial, UniPoly> primitive;
    bool ok = u_degree(content) > 0;
    if (ok) {
        for (const auto& [m, u] : groups) {
            UniPoly q;
            if (!u_divide(u, content, q, 1e-9)) {
                ok = false;
                break;
            }
            primitive[m] = q;
        }
    }
    if (!ok) {
        content = {1.0};
        primitive = groups;
    }

    // 4. normalize: primitive part gets leading coefficient 1 (highest total
    //    degree, r before cos before sin), the scale moves into the content.
    Poly prim_poly;
    for (const auto& [m, u] : primitive)
        for (size_t k = 0; k < u.size(); ++k) {
            if (u[k] == 0.0) continue;
            Monomial q = m;
            if (k > 0) q["r"] = static_cast<int>(k);
            p_add_term(prim_poly, q, u[k]);
        }
    std::vector<std::string> order{"r", "@cos", "@sin"};
    double lead = 0.0;
    {
        std::vector<int> best;
        for (const auto& [m, c] : prim_poly) {
            std::vector<int> key;
            int total = 0;
            for (const auto& name : order) {
                auto it = m.find(name);
                int v = it == m.end() ? 0 : it->second;
                key.push_back(v);
                total += v;
            }
            key.insert(key.begin(), total);
            if (best.empty() || key > best) {
                best = key;
                lead = c;
            }
        }
    }
    if (lead != 0.0 && lead != 1.0) {
        prim_poly = p_scale(prim_poly, 1.0 / lead);
        content = u_scale(content, lead);
    }

    // 5. radial part = r^r_mono * content
    Poly radial;
    for (size_t k = 0; k < content.size(); ++k) {
        if (content[k] == 0.0) continue;
        Monomial m;
        int e = static_cast<int>(k) + r_mono;
        if (e != 0) m["r"] = e;
        p_add_term(radial, m, content[k]);
    }
    out.radial = radial;
    out.mixed = prim_poly;
    return out;
}

inline bool poly_is_one(const Poly& p) {
    return p.size() == 1 && p.begin()->first.empty() && p.begin()->second == 1.0;
}

inline Expr emit_trig_monomial(const Monomial& m) {
    Expr out;
    bool have = false;
    for (const auto& [name, e] : m) {
        Expr base = atom_expr(name);
        Expr part = e == 1 ? base : pow(base, static_cast<double>(e));
        out = have ? out * part : part;
        have = true;
    }
    return have ? out : Expr::constant(1.0);
}

inline Expr emit_polar_rdot(const Poly& p) {
    PolarSplit s = split_radial(p);
    std::vector<std::string> order{"r", "@cos", "@sin"};
    Expr radial = emit_poly(s.radial, order);
    std::vector<Expr> factors;
    if (!s.trig.empty() || !poly_is_one(s.mixed) || !radial.is_constant(1.0))
        factors.push_back(radial);
    if (!s.trig.empty()) factors.push_back(emit_trig_monomial(s.trig));
    if (!poly_is_one(s.mixed)) factors.push_back(emit_poly(s.mixed, order));
    if (factors.empty()) return radial;
    Expr out = factors[0];
    for (size_t i = 1; i < factors.size(); ++i) out = out * factors[i];
    return out;
}

} // namespace detail

inline PolarSystem to_polar(const PlanarSystem& s) {
    Expr r = Expr::variable("r");
    Expr ct = cos(Expr::variable("theta"));
    Expr st = sin(Expr::variable("theta"));
    std::map<std::string, Expr> subs{{"x", r * ct}, {"y", r * st}};
    Expr fx_p = substitute(s.fx, subs);
    Expr fy_p = substitute(s.fy, subs);

    // canonical path for polynomial fields
    try {
        detail::ExpandOptions opt;
        opt.atoms = {"r"};
        opt.trig_atoms = true;
        detail::Poly fx_poly = detail::expand_poly(fx_p, opt);
        detail::Poly fy_poly = detail::expand_poly(fy_p, opt);
        detail::Poly c = detail::p_atom("@cos");
        detail::Poly si = detail::p_atom("@sin");
        detail::Poly rdot = detail::reduce_sin_squares(
            detail::p_add(detail::p_mul(c, fx_poly), detail::p_mul(si, fy_poly)));
        detail::Poly num = detail::reduce_sin_squares(
            detail::p_add(detail::p_mul(c, fy_poly), detail::p_mul(si, fx_poly), -1.0));
        detail::p_clean(rdot, 1e-13);
        detail::p_clean(num, 1e-13);
        detail::Poly thetadot;
        for (const auto& [m, coef] : num) {
            detail::Monomial q = m;
            q["r"] -= 1;
            if (q["r"] == 0) q.erase("r");
            thetadot[q] = coef;
        }
        std::vector<std::string> order{"r", "@cos", "@sin"};
        return PolarSystem(detail::emit_polar_rdot(rdot), detail::emit_poly(thetadot, order));
    } catch (const Error& err) {
        if (std::string(err.code()) != "expr/not-polynomial") throw;
    }

    // generic path: rdot = cos*fx + sin*fy, thetadot = (cos*fy - sin*fx)/r
    return PolarSystem(simplify(ct * fx_p + st * fy_p), simplify((ct * fy_p - st * fx_p) / r));
}

// ---------------------------------------------------------------------------
// Radial-form classification: structural factoring of the simplified product
// tree of rdot. Factors containing only r go to Upsilon0, only theta to
// Upsilon1, both to Upsilon2. Systems whose rdot mixes r and theta without a
// product structure are reported Unclassified.
// ---------------------------------------------------------------------------

namespace detail {

inline void flatten_product(const Expr& e, std::vector<Expr>& factors, bool& negated) {
    if (e.kind() == NodeKind::Unary && e.unary_op() == UnaryOp::Neg) {
        negated = !negated;
        flatten_product(e.child(), factors, negated);
        return;
    }
    if (e.kind() == NodeKind::Binary && e.binary_op() == BinaryOp::Mul) {
        flatten_product(e.lhs(), factors, negated);
        flatten_product(e.rhs(), factors, negated);
        return;
    }
    if (e.kind() == NodeKind::Binary && e.binary_op() == BinaryOp::Div &&
        e.rhs().is_constant()) {
        flatten_product(e.lhs(), factors, negated);
        factors.push_back(Expr::constant(1.0 / e.rhs().value()));
        return;
    }
    factors.push_back(e);
}

} // namespace detail

inline RadialForm classify_radial_form(const PolarSystem& p) {
    RadialForm form;
    form.psi = p.thetadot;

    std::vector<Expr> factors;
    bool negated = false;
    detail::flatten_product(simplify(p.rdot), factors, negated);

    Expr radial = Expr::constant(negated ? -1.0 : 1.0);
    std::optional<Expr> theta_only, mixed;
    auto fold = [](std::optional<Expr>& acc, const Expr& f) {
        acc = acc ? simplify(*acc * f) : f;
    };
    for (const Expr& f : factors) {
        auto vars = free_vars(f);
        bool has_r = vars.count("r") > 0;
        bool has_t = vars.count("theta") > 0;
        if (has_r && has_t)
            fold(mixed, f);
        else if (has_t)
            fold(theta_only, f);
        else
            radial = simplify(radial * f);
    }

    if (mixed) {
        if (radial.is_constant() && !radial.is_constant(0.0)) {
            form.kind = RadialKind::Unclassified;
            form.diagnostic =
                "rdot mixes r and theta without an extractable radial factor; "
                "ring-level factorization is out of scope";
            return form;
        }
        form.kind = RadialKind::Coupled;
        form.upsilon0 = radial;
        form.upsilon2 = theta_only ? simplify(*theta_only * *mixed) : *mixed;
        return form;
    }
    if (theta_only) {
        form.kind = RadialKind::Separable;
        form.upsilon0 = radial;
        form.upsilon1 = *theta_only;
        return form;
    }
    form.kind = RadialKind::PureRadial;
    form.upsilon0 = radial;
    return form;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

namespace detail {

inline double transform_roundtrip_defect(const Transform& t) {
    std::mt19937 rng(0x1a37);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
        double x = dist(rng), y = dist(rng);
        Bindings b = Bindings::xy(x, y);
        double u = evaluate(t.forward[0], b);
        double v = evaluate(t.forward[1], b);
        Bindings buv = Bindings::xy(u, v);
        double xb = evaluate(t.inverse[0], buv);
        double yb = evaluate(t.inverse[1], buv);
        worst = std::max(worst, std::max(std::abs(xb - x), std::abs(yb - y)));
        // and the other direction
        double xr = evaluate(t.inverse[0], b);
        double yr = evaluate(t.inverse[1], b);
        Bindings bxy = Bindings::xy(xr, yr);
        double uf = evaluate(t.forward[0], bxy);
        double vf = evaluate(t.forward[1], bxy);
        worst = std::max(worst, std::max(std::abs(uf - x), std::abs(vf - y)));
    }
    return worst;
}

} // namespace detail

inline Transform make_transform(Expr fwd_u, Expr fwd_v, Expr inv_x, Expr inv_y) {
    Transform t{{std::move(fwd_u), std::move(fwd_v)}, {std::move(inv_x), std::move(inv_y)}};
    double defect = detail::transform_roundtrip_defect(t);
    if (defect > 1e-10)
        throw Error("system/transform-not-invertible",
                    "round-trip defect " + format_double(defect) + " exceeds 1e-10");
    return t;
}

// Invert a lower-triangular polynomial transform u = x, v = y + g(x).
inline Transform invert_transform(const Expr& fwd_u, const Expr& fwd_v) {
    const char* code = "system/unsupported-transform";
    detail::ExpandOptions opt;
    opt.atoms = {"x", "y"};
    detail::Poly pu, pv;
    try {
        pu = detail::expand_poly(simplify(fwd_u), opt);
        pv = detail::expand_poly(simplify(fwd_v), opt);
    } catch (const Error&) {
        throw Error(code, "transform components must be polynomial in (x, y)");
    }
    detail::Poly x_mono = detail::p_atom("x");
    if (!(pu == x_mono))
        throw Error(code, "expected u = x");
    // v must be y + g(x): y-degree exactly one with unit coefficient
    detail::Poly g;
    for (const auto& [m, c] : pv) {
        auto it = m.find("y");
        int ydeg = it == m.end() ? 0 : it->second;
        if (ydeg == 0) {
            g[m] = c;
        } else if (ydeg == 1) {
            detail::Monomial rest = m;
            rest.erase("y");
            if (!rest.empty() || c != 1.0)
                throw Error(code, "expected v = y + g(x)");
        } else {
            throw Error(code, "expected v = y + g(x)");
        }
    }
    for (const auto& [m, c] : g)
        if (m.count("y")) throw Error(code, "expected v = y + g(x)");

    std::vector<std::string> order{"x", "y"};
    Expr g_expr = detail::emit_poly(g, order);
    Expr inv_y = simplify(Expr::variable("y") - g_expr);
    return make_transform(fwd_u, fwd_v, Expr::variable("x"), inv_y);
}

// Push-forward of s under t, renamed back to variables (x, y):
//   udot = du/dx fx + du/dy fy   (then x,y replaced via t.inverse)
inline PlanarSystem apply_transform(const PlanarSystem& s, const Transform& t) {
    double defect = detail::transform_roundtrip_defect(t);
    if (defect > 1e-10)
        throw Error("system/transform-not-invertible",
                    "round-trip defect " + format_double(defect) + " exceeds 1e-10");

    std::map<std::string, Expr> inv{{"x", t.inverse[0]}, {"y", t.inverse[1]}};
    auto push = [&](const Expr& comp) {
        Expr d = differentiate(comp, "x") * s.fx + differentiate(comp, "y") * s.fy;
        return simplify(substitute(simplify(d), inv));
    };
    Expr gx = push(t.forward[0]);
    Expr gy = push(t.forward[1]);

    // canonical polynomial form when available
    try {
        detail::ExpandOptions opt;
        opt.atoms = {"x", "y"};
        std::vector<std::string> order{"x", "y"};
        detail::Poly px = detail::expand_poly(gx, opt);
        detail::Poly py = detail::expand_poly(gy, opt);
        return PlanarSystem(detail::emit_poly(px, order), detail::emit_poly(py, order));
    } catch (const Error&) {
        return PlanarSystem(gx, gy);
    }
}

} // namespace limitlyap
