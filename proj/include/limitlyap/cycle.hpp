#pragma once

// Limit-cycle detection: positive zeros of the radial factor Upsilon0 with
// stability classification, plus a trajectory return-map cross-check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/ode.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

enum class Stability { Stable, Unstable, SemiStable };

inline const char* to_string(Stability s) {
    switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::SemiStable: return "semi-stable";
    }
    return "?";
}

struct LimitCycle {
    double radius = 0.0;
    Stability stability = Stability::SemiStable;
    double residual = 0.0;   // |Upsilon0(r*)|
    double derivative = 0.0; // Upsilon0'(r*)
    bool tangential = false; // double root found via |Upsilon0| minimum
};

namespace detail {

// Bisection/secant hybrid on a sign-change bracket, then Newton polish.
inline double refine_root(const std::function<double(double)>& f,
                          const std::function<double(double)>& df, double a, double b,
                          double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    for (int i = 0; i < 300 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++i) {
        double m = b - fb * (b - a) / (fb - fa); // secant, bisection every other step
        if (i % 2 == 1 || !std::isfinite(m) || m <= a || m >= b) m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    double m = 0.5 * (a + b);
    for (int i = 0; i < 3; ++i) {
        double d = df(m);
        if (d == 0.0 || !std::isfinite(d)) break;
        double step = f(m) / d;
        double next = m - step;
        if (!std::isfinite(next) || next < a - (b - a) || next > b + (b - a)) break;
        m = next;
    }
    return m;
}

inline Stability classify_stability(const std::function<double(double)>& f, double r, double d) {
    if (d < -1e-12) return Stability::Stable;
    if (d > 1e-12) return Stability::Unstable;
    double delta = 1e-6 * std::max(1.0, r);
    double fl = f(r - delta), fr = f(r + delta);
    if (fl > 0.0 && fr < 0.0) return Stability::Stable;
    if (fl < 0.0 && fr > 0.0) return Stability::Unstable;
    return Stability::SemiStable;
}

} // namespace detail

// Scan (1e-6, r_max] with 1e4 uniform brackets; every sign change is refined
// to |Upsilon0| <= 1e-12. Local minima of |Upsilon0| without a sign change
// are refined through Upsilon0' and reported as tangential (double) roots
// when the refined residual also reaches 1e-12.
inline std::vector<LimitCycle> find_cycle_radii(const Expr& u0, double r_max = 10.0) {
    if (r_max <= 0.0) throw Error("cycle/invalid-argument", "r_max must be positive");
    Expr du_expr = differentiate(u0, "r");
    auto f = [&](double r) { return evaluate(u0, Bindings().set("r", r)); };
    auto df = [&](double r) { return evaluate(du_expr, Bindings().set("r", r)); };

    const int n = 10000;
    const double lo = 1e-6;
    std::vector<double> rs(n + 1), fs(n + 1);
    int zero_samples = 0;
    for (int i = 0; i <= n; ++i) {
        rs[i] = lo + (r_max - lo) * i / n;
        fs[i] = f(rs[i]);
        if (fs[i] == 0.0) ++zero_samples;
    }
    if (zero_samples > n / 2) return {}; // identically-zero radial field

    std::vector<double> roots;
    std::vector<bool> tangential_flag;
    for (int i = 0; i <= n; ++i) {
        if (fs[i] == 0.0) {
            roots.push_back(rs[i]);
            tangential_flag.push_back(false);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (fs[i] == 0.0 || fs[i + 1] == 0.0) continue;
        if ((fs[i] < 0.0) != (fs[i + 1] < 0.0)) {
            roots.push_back(detail::refine_root(f, df, rs[i], rs[i + 1], fs[i], fs[i + 1]));
            tangential_flag.push_back(false);
        }
    }
    // tangential candidates: strict interior minima of |Upsilon0| away from
    // sign changes, refined via a bracketed zero of Upsilon0'
    for (int i = 1; i < n; ++i) {
        if (fs[i] == 0.0 || fs[i - 1] == 0.0 || fs[i + 1] == 0.0) continue;
        if ((fs[i - 1] < 0.0) != (fs[i] < 0.0)) continue;
        if ((fs[i] < 0.0) != (fs[i + 1] < 0.0)) continue;
        if (!(std::abs(fs[i]) < std::abs(fs[i - 1]) && std::abs(fs[i]) < std::abs(fs[i + 1])))
            continue;
        double da = df(rs[i - 1]), db = df(rs[i + 1]);
        if (da == 0.0 || db == 0.0 || (da < 0.0) == (db < 0.0)) continue;
        Expr ddu = differentiate(du_expr, "r");
        auto ddf = [&](double r) { return evaluate(ddu, Bindings().set("r", r)); };
        double m = detail::refine_root(df, ddf, rs[i - 1], rs[i + 1], da, db);
        if (std::abs(f(m)) <= 1e-12) {
            roots.push_back(m);
            tangential_flag.push_back(true);
        }
    }

    // sort + dedupe
    std::vector<size_t> order(roots.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return roots[a] < roots[b]; });
    std::vector<LimitCycle> cycles;
    for (size_t oi : order) {
        double r = roots[oi];
        if (r <= lo) continue;
        if (!cycles.empty() && std::abs(r - cycles.back().radius) <= 1e-9 * std::max(1.0, r))
            continue;
        LimitCycle c;
        c.radius = r;
        c.residual = std::abs(f(r));
        c.derivative = df(r);
        c.tangential = tangential_flag[oi];
        c.stability = detail::classify_stability(f, r, c.derivative);
        cycles.push_back(c);
    }
    return cycles;
}

// ---------------------------------------------------------------------------
// Return-map verification. When thetadot is sign-definite on the annulus the
// radial dynamics is reparametrized by the angle and integrated revolution by
// revolution; otherwise the report falls back to forward-time convergence.
// ---------------------------------------------------------------------------

struct ReturnMapReport {
    bool return_map_mode = true;
    std::vector<double> inner_residuals, outer_residuals; // one entry per revolution
    bool inner_monotone = false, outer_monotone = false;
    double slack = 0.0;
    std::string note;
};

inline ReturnMapReport verify_cycle_by_return_map(const PolarSystem& p, const LimitCycle& c,
                                                  double delta, double rtol = 1e-9,
                                                  double atol = 1e-12) {
    if (delta < 0.0 || delta >= c.radius / 2)
        throw Error("cycle/invalid-argument", "delta must satisfy 0 <= delta < r*/2");

    ReturnMapReport rep;
    rep.slack = 10.0 * (rtol * (1.0 + c.radius) + atol) + 1e-14;

    // monotone-theta precondition on the annulus [r*-d, r*+d]
    double d = std::max(delta, 1e-3);
    double min_abs = std::numeric_limits<double>::infinity();
    bool sign_set = false, positive = true, definite = true;
    for (int i = 0; i <= 32 && definite; ++i) {
        double r = c.radius - d + 2.0 * d * i / 32;
        for (int j = 0; j < 64; ++j) {
            double th = kTwoPi * j / 64;
            double v = evaluate(p.thetadot, Bindings::polar(r, th));
            min_abs = std::min(min_abs, std::abs(v));
            if (!sign_set) {
                positive = v > 0.0;
                sign_set = true;
            } else if ((v > 0.0) != positive || v == 0.0) {
                definite = false;
                break;
            }
        }
    }

    const int revolutions = 10;
    auto run = [&](double r0, std::vector<double>& residuals) {
        if (definite && min_abs >= 1e-6) {
            // s = sigma * theta increases along trajectories; dr/ds = rdot/(sigma*thetadot)
            double sigma = positive ? 1.0 : -1.0;
            Expr xv = Expr::variable("x"), yv = Expr::variable("y");
            Expr theta_of_s = positive ? xv : -xv;
            std::map<std::string, Expr> sub{{"r", yv}, {"theta", theta_of_s}};
            Expr rdot_s = substitute(p.rdot, sub);
            Expr thetadot_s = substitute(p.thetadot, sub);
            Expr slope = simplify(rdot_s / (Expr::constant(sigma) * thetadot_s));
            PlanarSystem sys(Expr::constant(1.0), slope);
            State y{0.0, r0};
            for (int k = 0; k < revolutions; ++k) {
                Trajectory leg = integrate_adaptive(sys, {0.0, y[1]}, kTwoPi, rtol, atol);
                y = leg.back();
                residuals.push_back(std::abs(y[1] - c.radius));
            }
        } else {
            // forward-time fallback: state (r, theta), checkpoints at T/10
            std::map<std::string, Expr> sub{{"r", Expr::variable("x")},
                                            {"theta", Expr::variable("y")}};
            PlanarSystem sys(substitute(p.rdot, sub), substitute(p.thetadot, sub));
            double T = 10.0 * kTwoPi;
            State y{r0, 0.0};
            for (int k = 0; k < revolutions; ++k) {
                Trajectory leg = integrate_adaptive(sys, y, T / revolutions, rtol, atol);
                y = leg.back();
                y[1] = std::fmod(y[1], kTwoPi);
                residuals.push_back(std::abs(y[0] - c.radius));
            }
        }
    };

    rep.return_map_mode = definite && min_abs >= 1e-6;
    if (!rep.return_map_mode)
        rep.note = "cycle/thetadot-vanishes: return map undefined, reporting forward-time "
                   "radius convergence";
    run(c.radius - delta, rep.inner_residuals);
    run(c.radius + delta, rep.outer_residuals);

    auto monotone = [&](const std::vector<double>& res) {
        double prev = std::abs(delta);
        for (double v : res) {
            if (v > prev + rep.slack) return false;
            prev = v;
        }
        return true;
    };
    rep.inner_monotone = monotone(rep.inner_residuals);
    rep.outer_monotone = monotone(rep.outer_residuals);
    return rep;
}

} // namespace limitlyap
