#pragma once

// Pointwise decomposition of a planar field against a potential:
//   f = -(D I + q J) grad(phi),  J = 90-degree rotation,
// with friction/transverse scalars s = D/(D^2+q^2), t = -q/(D^2+q^2),
// dissipative power H_P = -grad(phi).f, and the divergence criterion.

#include <algorithm>
#include <cmath>
#include <vector>

#include "limitlyap/cycle.hpp"
#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/lyapunov.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

struct DecompSample {
    State point{0.0, 0.0};
    double diffusion = 0.0;  // D (scalar diffusion)
    double rotation = 0.0;   // q (antisymmetric coefficient, Q = q J)
    double friction = 0.0;   // s = D / (D^2 + q^2)
    double transverse = 0.0; // t = -q / (D^2 + q^2)
    double power = 0.0;      // H_P = -grad(phi).f
    double div = 0.0;        // div f at the point
    bool singular = false;   // grad(phi) vanishes (or the decomposition degenerates)
    double reconstruction_residual = 0.0; // |f + (D I + q J) grad(phi)|
};

inline Expr divergence(const PlanarSystem& s) {
    Expr d = simplify(differentiate(s.fx, "x") + differentiate(s.fy, "y"));
    try {
        detail::ExpandOptions opt;
        opt.atoms = {"x", "y"};
        return detail::emit_poly(detail::expand_poly(d, opt), {"x", "y"});
    } catch (const Error&) {
        return d;
    }
}

// Precomputed symbolic pieces for repeated point evaluation.
class Decomposer {
public:
    Decomposer(const PlanarSystem& s, const Expr& phi)
        : sys_(s),
          phi_x_(differentiate(phi, "x")),
          phi_y_(differentiate(phi, "y")),
          div_(divergence(s)),
          lie_(lie_derivative(phi, s)) {}

    DecompSample at(double x, double y) const {
        Bindings b = Bindings::xy(x, y);
        DecompSample out;
        out.point = {x, y};
        double fx = evaluate(sys_.fx, b);
        double fy = evaluate(sys_.fy, b);
        double gx = evaluate(phi_x_, b);
        double gy = evaluate(phi_y_, b);
        out.power = -(fx * gx + fy * gy);
        out.div = evaluate(div_, b);

        double g2 = gx * gx + gy * gy;
        if (std::sqrt(g2) <= 1e-8) {
            out.singular = true;
            return out;
        }
        out.diffusion = -(fx * gx + fy * gy) / g2;
        // J grad(phi) = (gy, -gx)
        out.rotation = -(fx * gy - fy * gx) / g2;
        double denom = out.diffusion * out.diffusion + out.rotation * out.rotation;
        if (denom == 0.0) {
            out.singular = true; // f vanishes where grad(phi) does not
            return out;
        }
        out.friction = out.diffusion / denom;
        out.transverse = -out.rotation / denom;
        double rx = fx + out.diffusion * gx + out.rotation * gy;
        double ry = fy + out.diffusion * gy - out.rotation * gx;
        out.reconstruction_residual = std::sqrt(rx * rx + ry * ry);
        return out;
    }

    double power_at(double x, double y) const {
        double v = -evaluate(lie_, Bindings::xy(x, y));
        return std::abs(v) < 1e-12 ? 0.0 : v;
    }

    double div_at(double x, double y) const { return evaluate(div_, Bindings::xy(x, y)); }

    const Expr& lie() const { return lie_; }

private:
    PlanarSystem sys_;
    Expr phi_x_, phi_y_, div_, lie_;
};

inline DecompSample decompose(const PlanarSystem& s, const Expr& phi, const State& pt) {
    return Decomposer(s, phi).at(pt[0], pt[1]);
}

inline double dissipative_power(const PlanarSystem& s, const Expr& phi, const State& pt) {
    return Decomposer(s, phi).power_at(pt[0], pt[1]);
}

struct CriteriaReport {
    double hp_max_abs = 0.0;
    double div_min = 0.0, div_max = 0.0;
    bool disagree = false; // H_P ~ 0 on the cycle while |div| is bounded away from 0
    int samples = 0;

    const char* verdict() const { return disagree ? "disagree" : "agree"; }
};

// Samples the cycle (optionally mapped through t.inverse when the cycle lives
// in transformed coordinates) and compares the two dissipation criteria.
inline CriteriaReport criteria_report(const PlanarSystem& s, const Expr& phi,
                                      const LimitCycle& c, int n,
                                      const Transform* t = nullptr) {
    if (n < 1) throw Error("decomp/invalid-argument", "sample count must be positive");
    Decomposer dec(s, phi);
    CriteriaReport rep;
    rep.samples = n;
    double div_min = std::numeric_limits<double>::infinity();
    double div_max = -std::numeric_limits<double>::infinity();
    double hp_max = 0.0;
    for (int k = 0; k < n; ++k) {
        double th = kTwoPi * k / n;
        double x = c.radius * std::cos(th);
        double y = c.radius * std::sin(th);
        if (t) {
            Bindings b = Bindings::xy(x, y);
            double xi = evaluate(t->inverse[0], b);
            double yi = evaluate(t->inverse[1], b);
            x = xi;
            y = yi;
        }
        hp_max = std::max(hp_max, std::abs(dec.power_at(x, y)));
        double dv = dec.div_at(x, y);
        div_min = std::min(div_min, dv);
        div_max = std::max(div_max, dv);
    }
    rep.hp_max_abs = hp_max;
    rep.div_min = div_min;
    rep.div_max = div_max;
    rep.disagree = hp_max <= 1e-9 && std::max(std::abs(div_min), std::abs(div_max)) >= 1e-3;
    return rep;
}

} // namespace limitlyap
