#pragma once

// Deterministic integration of planar systems: classical fixed-step RK4 and
// an embedded Dormand-Prince 4(5) pair, plus vector-field grid sampling for
// phase portraits.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

using State = std::array<double, 2>;
using FieldFn = std::function<State(double t, const State&)>;

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    enum class Method { Rk4Fixed, Rk45Adaptive } method = Method::Rk4Fixed;
    double step = 0.0;
    double rtol = 0.0, atol = 0.0;

    const State& back() const { return states.back(); }
};

namespace detail {

inline FieldFn field_of(const PlanarSystem& s) {
    return [fx = s.fx, fy = s.fy](double, const State& y) -> State {
        Bindings b = Bindings::xy(y[0], y[1]);
        return {evaluate(fx, b), evaluate(fy, b)};
    };
}

inline bool finite(const State& y) { return std::isfinite(y[0]) && std::isfinite(y[1]); }

[[noreturn]] inline void throw_nonfinite(double t) {
    throw Error("ode/non-finite", "state became non-finite at t = " + format_double(t));
}

inline State rk4_step(const FieldFn& f, double t, const State& y, double h) {
    State k1 = f(t, y);
    State k2 = f(t + h / 2, {y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]});
    State k3 = f(t + h / 2, {y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]});
    State k4 = f(t + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

} // namespace detail

inline Trajectory integrate_rk4(const FieldFn& f, const State& x0, double t_end, double h) {
    if (h <= 0.0) throw Error("ode/invalid-argument", "step size must be positive");
    if (t_end < 0.0) throw Error("ode/invalid-argument", "t_end must be non-negative");
    Trajectory traj;
    traj.method = Trajectory::Method::Rk4Fixed;
    traj.step = h;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    if (t_end == 0.0) return traj;

    double t = 0.0;
    State y = x0;
    while (t < t_end) {
        double step = std::min(h, t_end - t); // truncate the last step onto t_end
        y = detail::rk4_step(f, t, y, step);
        t = (t_end - t <= h) ? t_end : t + step;
        if (!detail::finite(y)) detail::throw_nonfinite(t);
        traj.times.push_back(t);
        traj.states.push_back(y);
    }
    return traj;
}

inline Trajectory integrate_rk4(const PlanarSystem& s, const State& x0, double t_end, double h) {
    return integrate_rk4(detail::field_of(s), x0, t_end, h);
}

inline Trajectory integrate_adaptive(const FieldFn& f, const State& x0, double t_end,
                                     double rtol = 1e-9, double atol = 1e-12) {
    if (rtol <= 0.0 || atol <= 0.0)
        throw Error("ode/invalid-argument", "tolerances must be positive");
    Trajectory traj;
    traj.method = Trajectory::Method::Rk45Adaptive;
    traj.rtol = rtol;
    traj.atol = atol;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    if (t_end == 0.0) return traj;

    // Dormand-Prince 4(5)
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double t = 0.0;
    State y = x0;
    double h = std::min(1e-2, t_end);
    while (t < t_end) {
        h = std::min(h, t_end - t);
        if (h < 1e-14)
            throw Error("ode/step-underflow",
                        "step size underflow at t = " + format_double(t));

        State k1 = f(t, y);
        State k2 = f(t + c2 * h, {y[0] + h * a21 * k1[0], y[1] + h * a21 * k1[1]});
        State k3 = f(t + c3 * h, {y[0] + h * (a31 * k1[0] + a32 * k2[0]),
                                  y[1] + h * (a31 * k1[1] + a32 * k2[1])});
        State k4 = f(t + c4 * h, {y[0] + h * (a41 * k1[0] + a42 * k2[0] + a43 * k3[0]),
                                  y[1] + h * (a41 * k1[1] + a42 * k2[1] + a43 * k3[1])});
        State k5 = f(t + c5 * h,
                     {y[0] + h * (a51 * k1[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0]),
                      y[1] + h * (a51 * k1[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1])});
        State k6 = f(t + h, {y[0] + h * (a61 * k1[0] + a62 * k2[0] + a63 * k3[0] +
                                         a64 * k4[0] + a65 * k5[0]),
                             y[1] + h * (a61 * k1[1] + a62 * k2[1] + a63 * k3[1] +
                                         a64 * k4[1] + a65 * k5[1])});
        State y5 = {y[0] + h * (b1 * k1[0] + b3 * k3[0] + b4 * k4[0] + b5 * k5[0] + b6 * k6[0]),
                    y[1] + h * (b1 * k1[1] + b3 * k3[1] + b4 * k4[1] + b5 * k5[1] + b6 * k6[1])};
        State k7 = f(t + h, y5);
        State err = {h * (e1 * k1[0] + e3 * k3[0] + e4 * k4[0] + e5 * k5[0] + e6 * k6[0] +
                          e7 * k7[0]),
                     h * (e1 * k1[1] + e3 * k3[1] + e4 * k4[1] + e5 * k5[1] + e6 * k6[1] +
                          e7 * k7[1])};

        double norm = 0.0;
        bool bad = !detail::finite(y5) || !detail::finite(err);
        if (!bad) {
            for (int i = 0; i < 2; ++i) {
                double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
                norm += (err[i] / sc) * (err[i] / sc);
            }
            norm = std::sqrt(norm / 2.0);
            bad = !std::isfinite(norm);
        }

        if (!bad && norm <= 1.0) {
            t = (t_end - t <= h * (1.0 + 1e-12)) ? t_end : t + h;
            y = y5;
            traj.times.push_back(t);
            traj.states.push_back(y);
            double factor = norm == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(norm, -0.2)));
            h *= factor;
        } else {
            h *= bad ? 0.2 : std::max(0.2, 0.9 * std::pow(norm, -0.2));
        }
    }
    return traj;
}

inline Trajectory integrate_adaptive(const PlanarSystem& s, const State& x0, double t_end,
                                     double rtol = 1e-9, double atol = 1e-12) {
    return integrate_adaptive(detail::field_of(s), x0, t_end, rtol, atol);
}

// ---------------------------------------------------------------------------
// Phase-portrait sampling
// ---------------------------------------------------------------------------

struct VectorFieldGrid {
    Window window;
    int nx = 0, ny = 0;
    struct Row {
        double x, y, fx, fy;
        bool ok;
    };
    std::vector<Row> rows; // row-major: y outer, x inner
};

inline VectorFieldGrid sample_phase_portrait(const PlanarSystem& s, const Window& w, int nx,
                                             int ny) {
    if (nx < 2 || ny < 2)
        throw Error("ode/invalid-argument", "grid must be at least 2x2");
    if (!(w.xmax > w.xmin) || !(w.ymax > w.ymin))
        throw Error("ode/invalid-argument", "window must be nonempty");
    VectorFieldGrid g;
    g.window = w;
    g.nx = nx;
    g.ny = ny;
    g.rows.reserve(static_cast<size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy) {
        double y = w.ymin + (w.ymax - w.ymin) * iy / (ny - 1);
        for (int ix = 0; ix < nx; ++ix) {
            double x = w.xmin + (w.xmax - w.xmin) * ix / (nx - 1);
            VectorFieldGrid::Row row{x, y, 0.0, 0.0, true};
            try {
                Bindings b = Bindings::xy(x, y);
                row.fx = evaluate(s.fx, b);
                row.fy = evaluate(s.fy, b);
            } catch (const Error&) {
                row.ok = false;
                row.fx = row.fy = std::nan("");
            }
            g.rows.push_back(row);
        }
    }
    return g;
}

} // namespace limitlyap
