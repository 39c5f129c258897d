#pragma once

// Numerical boundary correspondence for smooth star-shaped Jordan curves:
// Theodorsen's fixed-point iteration tau(theta) = theta + K[ln rho(tau)](theta)
// where K is the conjugation operator on the circle, evaluated by
// trigonometric interpolation at n nodes.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/ode.hpp"

namespace limitlyap {

namespace detail {

inline void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw Error("conformal/invalid-argument", "FFT length must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

// Harmonic conjugate at the nodes: a_k cos -> a_k sin, b_k sin -> -b_k cos,
// constant and Nyquist terms map to zero.
inline std::vector<double> conjugate_samples(const std::vector<double>& u) {
    const size_t n = u.size();
    std::vector<std::complex<double>> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = u[i];
    fft(a, false);
    const std::complex<double> mi(0.0, -1.0), pi_(0.0, 1.0);
    a[0] = 0.0;
    for (size_t k = 1; k < n / 2; ++k) {
        a[k] *= mi;
        a[n - k] *= pi_;
    }
    a[n / 2] = 0.0;
    fft(a, true);
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = a[i].real();
    return v;
}

// Real trigonometric coefficients of samples: cos_coef[k], sin_coef[k] for
// k = 0..n/2 (sin_coef[0] = sin_coef[n/2] = 0).
inline void trig_coefficients(const std::vector<double>& u, std::vector<double>& cos_coef,
                              std::vector<double>& sin_coef) {
    const size_t n = u.size();
    std::vector<std::complex<double>> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = u[i];
    fft(a, false);
    cos_coef.assign(n / 2 + 1, 0.0);
    sin_coef.assign(n / 2 + 1, 0.0);
    cos_coef[0] = a[0].real() / static_cast<double>(n);
    for (size_t k = 1; k < n / 2; ++k) {
        cos_coef[k] = 2.0 * a[k].real() / static_cast<double>(n);
        sin_coef[k] = -2.0 * a[k].imag() / static_cast<double>(n);
    }
    cos_coef[n / 2] = a[n / 2].real() / static_cast<double>(n);
}

} // namespace detail

// Star-shaped curve z(theta) = center + rho(theta) e^{i theta}.
struct JordanCurve {
    Expr rho;
    State center{0.0, 0.0};
};

struct BoundaryMap {
    int n = 0;               // node count (power of two)
    std::vector<double> tau; // boundary correspondence at theta_k = 2 pi k / n
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> cos_coef, sin_coef; // trig coefficients of tau - theta
    bool epsilon_condition_ok = true;       // |rho'/rho| < 1 on a dense sample
    double epsilon_max = 0.0;
};

inline BoundaryMap theodorsen_map(const JordanCurve& c, int n = 1024, double tol = 1e-10,
                                  int max_iter = 200) {
    if (n < 8 || (n & (n - 1)) != 0)
        throw Error("conformal/invalid-argument", "n must be a power of two, n >= 8");
    if (tol <= 0.0 || max_iter < 1)
        throw Error("conformal/invalid-argument", "tol and max_iter must be positive");
    detail::require_vars(c.rho, {"theta"}, "conformal/invalid-curve", "rho");

    auto rho_at = [&](double th) { return evaluate(c.rho, Bindings().set("theta", th)); };

    // curve-class checks: positive, 2 pi periodic, Theodorsen epsilon-condition
    Expr drho = differentiate(c.rho, "theta");
    double eps_max = 0.0;
    for (int i = 0; i < 4096; ++i) {
        double th = kTwoPi * i / 4096;
        double r = rho_at(th);
        if (!(r > 0.0))
            throw Error("conformal/invalid-curve",
                        "rho must be positive (rho(" + format_double(th) + ") = " +
                            format_double(r) + ")");
        double dr = evaluate(drho, Bindings().set("theta", th));
        eps_max = std::max(eps_max, std::abs(dr / r));
    }
    if (std::abs(rho_at(0.0) - rho_at(kTwoPi)) > 1e-10 * std::max(1.0, std::abs(rho_at(0.0))))
        throw Error("conformal/invalid-curve", "rho must be 2*pi periodic");

    BoundaryMap m;
    m.n = n;
    m.epsilon_max = eps_max;
    m.epsilon_condition_ok = eps_max < 1.0;

    std::vector<double> theta(n), tau(n), u(n);
    for (int k = 0; k < n; ++k) theta[k] = kTwoPi * k / n;
    tau = theta;

    bool converged = false;
    for (int iter = 0; iter < max_iter && !converged; ++iter) {
        for (int k = 0; k < n; ++k) u[k] = std::log(rho_at(tau[k]));
        std::vector<double> v = detail::conjugate_samples(u);
        double diff = 0.0;
        for (int k = 0; k < n; ++k) {
            double next = theta[k] + v[k];
            diff = std::max(diff, std::abs(next - tau[k]));
            tau[k] = next;
        }
        m.iterations = iter + 1;
        m.residual = diff;
        converged = diff <= tol;
    }
    if (!converged)
        throw Error("conformal/not-converged",
                    "no convergence after " + std::to_string(max_iter) +
                        " iterations (residual " + format_double(m.residual) + ")");

    for (int k = 0; k + 1 < n; ++k)
        if (!(tau[k + 1] > tau[k]))
            throw Error("conformal/non-monotone",
                        "boundary correspondence is not strictly increasing near theta = " +
                            format_double(theta[k]));
    if (!(tau[0] + kTwoPi > tau[n - 1]))
        throw Error("conformal/non-monotone",
                    "boundary correspondence is not strictly increasing at wrap-around");

    m.tau = tau;
    std::vector<double> t_part(n);
    for (int k = 0; k < n; ++k) t_part[k] = tau[k] - theta[k];
    detail::trig_coefficients(t_part, m.cos_coef, m.sin_coef);
    return m;
}

namespace detail {

// Evaluate the periodic part tau - theta by its trigonometric series.
inline double boundary_series(const BoundaryMap& m, double th) {
    double acc = m.cos_coef.empty() ? 0.0 : m.cos_coef[0];
    for (size_t k = 1; k < m.cos_coef.size(); ++k) {
        acc += m.cos_coef[k] * std::cos(k * th);
        acc += m.sin_coef[k] * std::sin(k * th);
    }
    return acc;
}

} // namespace detail

// tau(theta) by trigonometric interpolation; exact at nodes and satisfying
// tau(theta + 2 pi) = tau(theta) + 2 pi identically (periodic argument
// reduction of the series part).
inline double map_curve_to_circle(const JordanCurve&, const BoundaryMap& m, double theta) {
    if (m.tau.empty()) throw Error("conformal/invalid-argument", "map is empty");
    double reduced = std::fmod(theta, kTwoPi);
    if (reduced < 0.0) reduced += kTwoPi;
    return theta + detail::boundary_series(m, reduced);
}

struct DiffeoReport {
    double monotonicity_margin = 0.0; // min discrete derivative of tau
    double periodicity_defect = 0.0;  // |tau(2 pi) - tau(0) - 2 pi| (unreduced series)
    double spectral_tail = 0.0;       // tail-to-peak coefficient ratio of tau - theta
    bool pass = false;
};

inline DiffeoReport verify_diffeomorphism(const BoundaryMap& m) {
    DiffeoReport rep;
    if (m.tau.empty() || m.n < 2) return rep;
    const int n = m.n;
    double h = kTwoPi / n;
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < n; ++k) margin = std::min(margin, (m.tau[k + 1] - m.tau[k]) / h);
    margin = std::min(margin, (m.tau[0] + kTwoPi - m.tau[n - 1]) / h);
    rep.monotonicity_margin = margin;

    std::vector<double> cc = m.cos_coef, sc = m.sin_coef;
    if (cc.empty()) {
        std::vector<double> t_part(n);
        for (int k = 0; k < n; ++k) t_part[k] = m.tau[k] - h * k;
        detail::trig_coefficients(t_part, cc, sc);
    }
    BoundaryMap series = m;
    series.cos_coef = cc;
    series.sin_coef = sc;
    rep.periodicity_defect = std::abs(detail::boundary_series(series, kTwoPi) -
                                      detail::boundary_series(series, 0.0));

    double peak = 0.0, tail = 0.0;
    for (size_t k = 1; k < cc.size(); ++k) {
        double mag = std::max(std::abs(cc[k]), std::abs(sc[k]));
        peak = std::max(peak, mag);
        if (k > cc.size() / 2) tail = std::max(tail, mag);
    }
    rep.spectral_tail = peak > 0.0 ? tail / peak : 0.0;
    rep.pass = margin > 0.0 && rep.periodicity_defect <= 1e-10;
    return rep;
}

} // namespace limitlyap
