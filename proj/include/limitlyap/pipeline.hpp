#pragma once

// End-to-end analysis: parse -> optional transform -> polar form -> radial
// classification -> cycle detection -> potential construction -> Cartesian
// potential -> composition back through the transform -> Lyapunov
// verification -> dissipation criteria on the cycle.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "limitlyap/cycle.hpp"
#include "limitlyap/decomp.hpp"
#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/io.hpp"
#include "limitlyap/lyapunov.hpp"
#include "limitlyap/report.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

struct PipelineOptions {
    std::optional<Window> window; // overrides the fixture window when set
    int grid_n = 101;
    double r_max = 10.0;
    int cycle_samples = 360;
    bool run_criteria = true;
};

namespace detail {

inline std::string canonical_config(const SystemDefinition& def, const Window& w,
                                    const PipelineOptions& opt) {
    std::ostringstream os;
    os << "fx=" << (def.fx ? print(*def.fx) : "") << ";fy=" << (def.fy ? print(*def.fy) : "")
       << ";tu=" << (def.transform_u ? print(*def.transform_u) : "")
       << ";tv=" << (def.transform_v ? print(*def.transform_v) : "") << ";window="
       << format_double(w.xmin) << "," << format_double(w.xmax) << "," << format_double(w.ymin)
       << "," << format_double(w.ymax) << ";grid=" << opt.grid_n
       << ";rmax=" << format_double(opt.r_max) << ";samples=" << opt.cycle_samples;
    return os.str();
}

} // namespace detail

inline AnalysisReport run_pipeline(const SystemDefinition& def, const PipelineOptions& opt) {
    if (!def.fx || !def.fy)
        throw Error("cli/io", "system definition needs both fx and fy");

    Window w = opt.window ? *opt.window : def.window.value_or(Window{-2.0, 2.0, -2.0, 2.0});

    AnalysisReport rep;
    rep.config = detail::canonical_config(def, w, opt);
    rep.hash = config_hash(rep.config);
    rep.window = {w.xmin, w.xmax, w.ymin, w.ymax};
    rep.grid_n = opt.grid_n;
    rep.r_max = opt.r_max;
    rep.cycle_samples = opt.cycle_samples;

    PlanarSystem original(*def.fx, *def.fy);
    rep.fx = print(original.fx);
    rep.fy = print(original.fy);

    std::optional<Transform> transform;
    PlanarSystem working = original;
    if (def.transform_u || def.transform_v) {
        if (!def.transform_u || !def.transform_v)
            throw Error("cli/io", "transform needs both transform_u and transform_v");
        transform = invert_transform(*def.transform_u, *def.transform_v);
        working = apply_transform(original, *transform);
        rep.transform_u = print(transform->forward[0]);
        rep.transform_v = print(transform->forward[1]);
    }

    PolarSystem polar = to_polar(working);
    rep.rdot = print(polar.rdot);
    rep.thetadot = print(polar.thetadot);

    RadialForm form = classify_radial_form(polar);
    rep.radial_kind = to_string(form.kind);
    rep.psi = print(form.psi);
    if (form.kind == RadialKind::Unclassified) {
        rep.verdict = "fail";
        rep.diagnostic = form.diagnostic;
        rep.exit_code = 2;
        return rep;
    }
    rep.upsilon0 = print(form.upsilon0);
    if (form.upsilon1) rep.upsilon1 = print(*form.upsilon1);
    if (form.upsilon2) rep.upsilon2 = print(*form.upsilon2);

    auto cycles = find_cycle_radii(form.upsilon0, opt.r_max);
    for (const auto& c : cycles)
        rep.cycles.push_back({c.radius, to_string(c.stability), c.residual, c.derivative,
                              c.tangential});

    Potential pot = construct_potential(form.upsilon0, opt.r_max);
    rep.construction = pot.construction == PotentialConstruction::Symbolic ? "symbolic" : "numeric";
    rep.quad_error_bound = pot.quad_error_bound;
    rep.infimum_certificate = pot.global_infimum_certificate;
    if (pot.construction == PotentialConstruction::Numeric) {
        rep.verdict = "fail";
        rep.diagnostic = "Upsilon0 is not polynomial; the potential is a quadrature table and "
                         "the Cartesian verification pipeline does not apply";
        rep.exit_code = 2;
        return rep;
    }
    rep.phi_r = print(pot.phi_r);

    Expr phi_working = to_cartesian(pot); // throws lyapunov/odd-powers when unsound
    rep.phi_working = print(phi_working);
    Expr phi_final = transform ? compose_with_inverse(phi_working, *transform) : phi_working;
    rep.phi = print(phi_final);

    // Separable forms need Upsilon1 >= 0 for the descent argument
    if (form.kind == RadialKind::Separable && form.upsilon1) {
        double min_u1 = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 1024; ++k) {
            double th = kTwoPi * k / 1024;
            min_u1 = std::min(min_u1, evaluate(*form.upsilon1, Bindings().set("theta", th)));
        }
        rep.upsilon1_nonnegative = min_u1 >= -1e-12;
    }

    LyapunovReport ver = verify_lyapunov(phi_final, original, w, opt.grid_n);
    rep.verified = true;
    rep.lyapunov_pass = ver.pass;
    rep.phi_min = ver.phi_min;
    rep.phi_argmin = {ver.phi_argmin[0], ver.phi_argmin[1]};
    rep.lie_max = ver.lie_max;
    rep.lie_argmax = {ver.lie_argmax[0], ver.lie_argmax[1]};
    rep.stationary_count = static_cast<long>(ver.stationary_points.size());
    if (!ver.stationary_points.empty()) {
        double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
        for (const auto& pt : ver.stationary_points) {
            double r = std::hypot(pt[0], pt[1]);
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        rep.stationary_r_min = rmin;
        rep.stationary_r_max = rmax;
    }

    if (opt.run_criteria && !cycles.empty()) {
        const LimitCycle* pick = &cycles[0];
        for (const auto& c : cycles)
            if (c.stability == Stability::Stable) {
                pick = &c;
                break;
            }
        CriteriaReport crit = criteria_report(original, phi_final, *pick, opt.cycle_samples,
                                              transform ? &*transform : nullptr);
        rep.has_criteria = true;
        rep.hp_max_abs = crit.hp_max_abs;
        rep.div_min = crit.div_min;
        rep.div_max = crit.div_max;
        rep.criteria_verdict = crit.verdict();
    }

    bool pass = ver.pass && pot.global_infimum_certificate && rep.upsilon1_nonnegative;
    rep.verdict = pass ? "pass" : "fail";
    if (!pass) {
        if (!ver.pass)
            rep.diagnostic = "Lie derivative exceeds 1e-9 on the verification grid";
        else if (!pot.global_infimum_certificate)
            rep.diagnostic = "potential has no global infimum (negative leading coefficient)";
        else
            rep.diagnostic = "Upsilon1 takes negative values; descent is not one-signed";
    }
    rep.exit_code = pass ? 0 : 2;
    return rep;
}

} // namespace limitlyap
