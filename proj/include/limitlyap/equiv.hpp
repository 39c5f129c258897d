#pragma once

// Orbit-equivalence proxies for pairs of systems: pointwise parallelism of
// the fields (trajectories coincide as point sets iff the fields are
// parallel wherever both are nonzero) and shared invariant sets of the
// radial dynamics. Full orbit-set equality is not decidable numerically, so
// the report presents both findings and never claims equivalence outright.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "limitlyap/cycle.hpp"
#include "limitlyap/detail/parallel.hpp"
#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

enum class EquivVerdict { Parallel, SameAttractorsOnly, Different };

inline const char* to_string(EquivVerdict v) {
    switch (v) {
    case EquivVerdict::Parallel: return "parallel";
    case EquivVerdict::SameAttractorsOnly: return "same-attractors-only";
    case EquivVerdict::Different: return "different";
    }
    return "?";
}

struct EquivalenceReport {
    double parallelism_residual = 0.0; // max |f1 x f2| / (|f1| |f2|) over the grid
    long skipped_points = 0;           // grid points where either field vanishes
    struct SharedEntry {
        double radius = 0.0;
        bool in_first = false, in_second = false;
    };
    std::vector<SharedEntry> shared_cycles;
    std::vector<SharedEntry> shared_fixed_points;
    EquivVerdict verdict = EquivVerdict::Different;
};

// Max over an n x n window grid of the normalized cross product
// |fx1 fy2 - fy1 fx2| / (|f1| |f2|); points where either norm is <= 1e-12
// are skipped.
inline double parallelism_residual(const PlanarSystem& s1, const PlanarSystem& s2,
                                   const Window& w, int n, long* skipped = nullptr) {
    if (n < 2) throw Error("equiv/invalid-argument", "grid size must be >= 2");
    struct Partial {
        double max_res = 0.0;
        long skipped = 0;
    };
    auto chunk = [&](long lo, long hi) {
        Partial part;
        for (long iy = lo; iy < hi; ++iy) {
            double y = w.ymin + (w.ymax - w.ymin) * iy / (n - 1);
            for (int ix = 0; ix < n; ++ix) {
                double x = w.xmin + (w.xmax - w.xmin) * ix / (n - 1);
                Bindings b = Bindings::xy(x, y);
                double f1x = evaluate(s1.fx, b), f1y = evaluate(s1.fy, b);
                double f2x = evaluate(s2.fx, b), f2y = evaluate(s2.fy, b);
                double n1 = std::sqrt(f1x * f1x + f1y * f1y);
                double n2 = std::sqrt(f2x * f2x + f2y * f2y);
                if (n1 <= 1e-12 || n2 <= 1e-12) {
                    ++part.skipped;
                    continue;
                }
                double cross = std::abs(f1x * f2y - f1y * f2x);
                part.max_res = std::max(part.max_res, cross / (n1 * n2));
            }
        }
        return part;
    };
    auto combine = [](Partial acc, Partial next) {
        acc.max_res = std::max(acc.max_res, next.max_res);
        acc.skipped += next.skipped;
        return acc;
    };
    Partial total = detail::parallel_reduce<Partial>(n, Partial{}, chunk, combine);
    if (skipped) *skipped = total.skipped;
    return total.max_res;
}

namespace detail {

// Parallelism residual of two polar fields on an annulus grid, measured in
// the orthonormal polar frame (v = rdot e_r + r thetadot e_theta), which
// agrees with the Cartesian normalized cross product.
inline double polar_parallelism_residual(const PolarSystem& p1, const PolarSystem& p2,
                                         double r_lo, double r_hi, int n, long* skipped) {
    double max_res = 0.0;
    long skip = 0;
    for (int i = 0; i < n; ++i) {
        double r = r_lo + (r_hi - r_lo) * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            double th = kTwoPi * j / n;
            Bindings b = Bindings::polar(r, th);
            double a1 = evaluate(p1.rdot, b), w1 = r * evaluate(p1.thetadot, b);
            double a2 = evaluate(p2.rdot, b), w2 = r * evaluate(p2.thetadot, b);
            double n1 = std::sqrt(a1 * a1 + w1 * w1);
            double n2 = std::sqrt(a2 * a2 + w2 * w2);
            if (n1 <= 1e-12 || n2 <= 1e-12) {
                ++skip;
                continue;
            }
            double cross = std::abs(a1 * w2 - w1 * a2);
            max_res = std::max(max_res, cross / (n1 * n2));
        }
    }
    if (skipped) *skipped = skip;
    return max_res;
}

} // namespace detail

// Compares the radial invariant sets of two polar systems (cycles = positive
// zeros of Upsilon0, fixed point at r = 0) and the polar parallelism
// residual on an annulus covering the detected cycles.
inline EquivalenceReport shared_attractors(const PolarSystem& p1, const PolarSystem& p2,
                                           double r_max = 10.0) {
    RadialForm f1 = classify_radial_form(p1);
    RadialForm f2 = classify_radial_form(p2);
    if (f1.kind == RadialKind::Unclassified || f2.kind == RadialKind::Unclassified)
        throw Error("equiv/unclassified-system",
                    "no extractable Upsilon0: " +
                        (f1.kind == RadialKind::Unclassified ? f1.diagnostic : f2.diagnostic));

    auto cycles1 = find_cycle_radii(f1.upsilon0, r_max);
    auto cycles2 = find_cycle_radii(f2.upsilon0, r_max);

    EquivalenceReport rep;
    // merge cycle radii within 1e-8
    std::vector<std::pair<double, std::pair<bool, bool>>> merged;
    auto add = [&](double r, bool first) {
        for (auto& [mr, flags] : merged) {
            if (std::abs(mr - r) <= 1e-8) {
                (first ? flags.first : flags.second) = true;
                return;
            }
        }
        merged.push_back({r, {first, !first}});
    };
    for (const auto& c : cycles1) add(c.radius, true);
    for (const auto& c : cycles2) add(c.radius, false);
    std::sort(merged.begin(), merged.end());
    for (const auto& [r, flags] : merged)
        rep.shared_cycles.push_back({r, flags.first, flags.second});

    // fixed point of the radial systems at r = 0
    auto zero_root = [](const Expr& u0) {
        try {
            return std::abs(evaluate(u0, Bindings().set("r", 0.0))) <= 1e-12;
        } catch (const Error&) {
            return false;
        }
    };
    bool z1 = zero_root(f1.upsilon0), z2 = zero_root(f2.upsilon0);
    if (z1 || z2) rep.shared_fixed_points.push_back({0.0, z1, z2});

    double r_hi = 1.5;
    for (const auto& e : rep.shared_cycles) r_hi = std::max(r_hi, e.radius + 0.5);
    rep.parallelism_residual =
        detail::polar_parallelism_residual(p1, p2, 0.1, std::min(r_hi, r_max), 64,
                                           &rep.skipped_points);

    bool all_shared = true;
    for (const auto& e : rep.shared_cycles)
        if (!(e.in_first && e.in_second)) all_shared = false;
    for (const auto& e : rep.shared_fixed_points)
        if (!(e.in_first && e.in_second)) all_shared = false;

    if (rep.parallelism_residual <= 1e-9)
        rep.verdict = EquivVerdict::Parallel;
    else if (all_shared)
        rep.verdict = EquivVerdict::SameAttractorsOnly;
    else
        rep.verdict = EquivVerdict::Different;
    return rep;
}

} // namespace limitlyap
