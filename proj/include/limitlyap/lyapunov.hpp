#pragma once

// Potential construction by radial quadrature, conversion to Cartesian
// coordinates, Lie derivatives and Lyapunov verification.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "limitlyap/detail/parallel.hpp"
#include "limitlyap/detail/poly.hpp"
#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/ode.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

namespace detail {

// Adaptive Simpson with the |S2-S1|/15 acceptance rule; accumulates an error
// bound and refuses intervals that never settle (non-integrable behavior).
struct SimpsonState {
    const std::function<double(double)>& f;
    double tol;
    double err = 0.0;
};

inline double adaptive_simpson(SimpsonState& st, double a, double b, double fa, double fm,
                               double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = st.f(0.5 * (a + m));
    double rm = st.f(0.5 * (m + b));
    double left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    double delta = left + right - whole;
    if (depth > 50)
        throw Error("lyapunov/quadrature",
                    "quadrature failed to converge near r = " + format_double(m) +
                        " (non-integrable singularity?)");
    if (std::abs(delta) <= 15.0 * tol) {
        st.err += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(st, a, m, fa, lm, fm, left, tol / 2.0, depth + 1) +
           adaptive_simpson(st, m, b, fm, rm, fb, right, tol / 2.0, depth + 1);
}

inline double integrate_simpson(SimpsonState& st, double a, double b) {
    double fa = st.f(a), fb = st.f(b), fm = st.f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(st, a, b, fa, fm, fb, whole, st.tol, 0);
}

} // namespace detail

enum class PotentialConstruction { Symbolic, Numeric };

// phi with dphi/dr = -Upsilon0. Symbolic for polynomial Upsilon0, otherwise a
// quadrature table on [0, r_max] with cubic interpolation between nodes.
struct Potential {
    PotentialConstruction construction = PotentialConstruction::Symbolic;
    Expr u0;    // the radial right-hand side integrated
    Expr phi_r; // symbolic construction only

    std::vector<double> nodes, values; // numeric construction only
    double r_max = 10.0;
    double quad_error_bound = 0.0;

    double window_min = 0.0;    // min over [0, r_max]
    double window_argmin = 0.0;
    bool global_infimum_certificate = false;

    double value(double r) const {
        if (construction == PotentialConstruction::Symbolic)
            return evaluate(phi_r, Bindings().set("r", r));
        if (r < 0.0 || r > r_max)
            throw Error("lyapunov/out-of-range",
                        "numeric potential tabulated on [0, " + format_double(r_max) + "]");
        // cubic Lagrange through the four nodes around r
        size_t n = nodes.size();
        double h = nodes[1] - nodes[0];
        long i = std::clamp<long>(static_cast<long>((r - nodes[0]) / h), 1, static_cast<long>(n) - 3);
        double t = (r - nodes[i]) / h; // in [-1, 2] near the bracketing interval
        double ym1 = values[i - 1], y0 = values[i], y1 = values[i + 1], y2 = values[i + 2];
        // Lagrange basis at offsets -1, 0, 1, 2
        double lm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        double l0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        double l1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        double l2 = (t + 1.0) * t * (t - 1.0) / 6.0;
        return ym1 * lm1 + y0 * l0 + y1 * l1 + y2 * l2;
    }
};

inline Potential construct_potential(const Expr& u0, double r_max = 10.0) {
    detail::require_vars(u0, {"r"}, "lyapunov/invalid-argument", "Upsilon0");
    if (r_max <= 0.0) throw Error("lyapunov/invalid-argument", "r_max must be positive");

    Potential p;
    p.u0 = u0;
    p.r_max = r_max;

    bool symbolic = true;
    try {
        Expr anti = antiderivative_poly(u0, "r");
        detail::ExpandOptions opt;
        opt.atoms = {"r"};
        detail::Poly poly = detail::p_scale(detail::expand_poly(anti, opt), -1.0);
        p.phi_r = detail::emit_poly(poly, {"r"});
        // global infimum certificate: polynomial with positive leading
        // coefficient (or a constant) is bounded below on r >= 0
        int max_deg = 0;
        double lead = 0.0;
        bool laurent = false;
        for (const auto& [m, c] : poly) {
            auto it = m.find("r");
            int d = it == m.end() ? 0 : it->second;
            if (d < 0) laurent = true;
            if (d >= max_deg) {
                max_deg = d;
                lead = c;
            }
        }
        p.global_infimum_certificate = !laurent && (poly.empty() || max_deg == 0 || lead > 0.0);
    } catch (const Error& e) {
        if (std::string(e.code()) != "expr/not-polynomial") throw;
        symbolic = false;
    }

    if (!symbolic) {
        p.construction = PotentialConstruction::Numeric;
        const int n = 2048;
        auto f = [&](double r) { return evaluate(u0, Bindings().set("r", r)); };
        std::function<double(double)> fn = f;
        detail::SimpsonState st{fn, 1e-12 / n, 0.0};
        p.nodes.resize(n + 1);
        p.values.resize(n + 1);
        p.nodes[0] = 0.0;
        p.values[0] = 0.0;
        for (int i = 1; i <= n; ++i) {
            p.nodes[i] = r_max * i / n;
            try {
                p.values[i] =
                    p.values[i - 1] - detail::integrate_simpson(st, p.nodes[i - 1], p.nodes[i]);
            } catch (const Error& e) {
                if (std::string(e.code()) == "lyapunov/quadrature") throw;
                throw Error("lyapunov/quadrature",
                            std::string(e.what()) + " while integrating Upsilon0 on [" +
                                format_double(p.nodes[i - 1]) + ", " +
                                format_double(p.nodes[i]) + "]");
            }
        }
        p.quad_error_bound = st.err;
    }

    // reported minimum over the compact window [0, r_max]
    const int scan = 2048;
    double best = std::numeric_limits<double>::infinity(), best_r = 0.0;
    for (int i = 0; i <= scan; ++i) {
        double r = r_max * i / scan;
        double v = p.value(r);
        if (v < best) {
            best = v;
            best_r = r;
        }
    }
    p.window_min = best;
    p.window_argmin = best_r;
    return p;
}

// Substitute r^2 = x^2 + y^2; requires even powers only. With force set, odd
// powers are substituted through sqrt(x^2 + y^2), which is not smooth at the
// origin.
inline Expr to_cartesian(const Potential& p, bool force_nonsmooth = false) {
    if (p.construction != PotentialConstruction::Symbolic)
        throw Error("lyapunov/numeric-potential",
                    "numeric potentials have no closed Cartesian form");
    detail::ExpandOptions opt;
    opt.atoms = {"r"};
    detail::Poly poly = detail::expand_poly(p.phi_r, opt);

    double maxc = 0.0;
    int max_deg = 0;
    for (const auto& [m, c] : poly) {
        auto it = m.find("r");
        int d = it == m.end() ? 0 : it->second;
        if (d < 0)
            throw Error("lyapunov/odd-powers", "potential has negative powers of r");
        maxc = std::max(maxc, std::abs(c));
        max_deg = std::max(max_deg, d);
    }
    std::vector<double> coeff(max_deg + 1, 0.0);
    for (const auto& [m, c] : poly) {
        auto it = m.find("r");
        coeff[it == m.end() ? 0 : it->second] += c;
    }
    bool has_odd = false;
    for (int d = 1; d <= max_deg; d += 2)
        if (std::abs(coeff[d]) > 1e-12 * std::max(1.0, maxc)) has_odd = true;

    Expr x = Expr::variable("x"), y = Expr::variable("y");
    Expr g = x * x + y * y;
    if (has_odd) {
        if (!force_nonsmooth)
            throw Error("lyapunov/odd-powers",
                        "potential has odd powers of r; the Cartesian form involves "
                        "sqrt(x^2+y^2) and is not smooth at the origin");
        return simplify(substitute(p.phi_r, {{"r", sqrt(g)}}));
    }

    Expr out;
    bool first = true;
    for (int d = 0; d <= max_deg; d += 2) {
        double c = coeff[d];
        if (c == 0.0) continue;
        int k = d / 2;
        Expr mono = k == 0 ? Expr::constant(1.0) : (k == 1 ? g : pow(g, static_cast<double>(k)));
        Expr term;
        if (k == 0)
            term = Expr::constant(c);
        else if (c == 1.0)
            term = mono;
        else if (c == -1.0)
            term = -mono;
        else
            term = Expr::constant(c) * mono;
        if (first) {
            out = term;
            first = false;
        } else if (c < 0.0 && k > 0) {
            Expr pos = (c == -1.0) ? mono : Expr::constant(-c) * mono;
            out = out - pos;
        } else {
            out = out + term;
        }
    }
    return first ? Expr::constant(0.0) : out;
}

inline Expr lie_derivative(const Expr& phi, const PlanarSystem& s) {
    return simplify(differentiate(phi, "x") * s.fx + differentiate(phi, "y") * s.fy);
}

// Substitute the forward transform into a potential written in the
// transformed coordinates.
inline Expr compose_with_inverse(const Expr& phi, const Transform& t) {
    double defect = detail::transform_roundtrip_defect(t);
    if (defect > 1e-10)
        throw Error("system/transform-not-invertible",
                    "round-trip defect " + format_double(defect) + " exceeds 1e-10");
    return simplify(substitute(phi, {{"x", t.forward[0]}, {"y", t.forward[1]}}));
}

struct LyapunovReport {
    double phi_min = 0.0;
    State phi_argmin{0.0, 0.0};
    double lie_max = 0.0;
    State lie_argmax{0.0, 0.0};
    bool pass = false;
    std::vector<State> stationary_points; // grid points with |lie| <= 1e-9
    int grid_n = 0;
};

// Definition check on a window grid: condition (i) as the reported minimum,
// condition (ii) as max of the Lie derivative (pass iff <= 1e-9).
inline LyapunovReport verify_lyapunov(const Expr& phi, const PlanarSystem& s, const Window& w,
                                      int n) {
    if (n < 2) throw Error("lyapunov/invalid-argument", "grid size must be >= 2");
    Expr lie = lie_derivative(phi, s);

    struct Partial {
        double phi_min = std::numeric_limits<double>::infinity();
        State phi_argmin{0, 0};
        double lie_max = -std::numeric_limits<double>::infinity();
        State lie_argmax{0, 0};
        std::vector<State> stationary;
    };
    auto chunk = [&](long lo, long hi) {
        Partial part;
        for (long iy = lo; iy < hi; ++iy) {
            double y = w.ymin + (w.ymax - w.ymin) * iy / (n - 1);
            for (int ix = 0; ix < n; ++ix) {
                double x = w.xmin + (w.xmax - w.xmin) * ix / (n - 1);
                Bindings b = Bindings::xy(x, y);
                double pv, lv;
                try {
                    pv = evaluate(phi, b);
                    lv = evaluate(lie, b);
                } catch (const Error& e) {
                    throw Error(e.code(), std::string(e.what()) + " at grid point (" +
                                              format_double(x) + ", " + format_double(y) + ")");
                }
                if (pv < part.phi_min) {
                    part.phi_min = pv;
                    part.phi_argmin = {x, y};
                }
                if (lv > part.lie_max) {
                    part.lie_max = lv;
                    part.lie_argmax = {x, y};
                }
                if (std::abs(lv) <= 1e-9) part.stationary.push_back({x, y});
            }
        }
        return part;
    };
    auto combine = [](Partial acc, Partial next) {
        if (next.phi_min < acc.phi_min) {
            acc.phi_min = next.phi_min;
            acc.phi_argmin = next.phi_argmin;
        }
        if (next.lie_max > acc.lie_max) {
            acc.lie_max = next.lie_max;
            acc.lie_argmax = next.lie_argmax;
        }
        acc.stationary.insert(acc.stationary.end(), next.stationary.begin(),
                              next.stationary.end());
        return acc;
    };
    Partial total = detail::parallel_reduce<Partial>(n, Partial{}, chunk, combine);

    LyapunovReport rep;
    rep.phi_min = total.phi_min;
    rep.phi_argmin = total.phi_argmin;
    rep.lie_max = total.lie_max;
    rep.lie_argmax = total.lie_argmax;
    rep.stationary_points = std::move(total.stationary);
    rep.pass = total.lie_max <= 1e-9;
    rep.grid_n = n;
    return rep;
}

} // namespace limitlyap
