// limitlyap command-line front end.
//
// Subcommands: polar, cycles, lyapunov, decompose, criteria, conformal,
// portrait, equiv, pipeline. Exit status: 0 on success, 2 on verification
// failure, 1 on usage or I/O errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "limitlyap/limitlyap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace limitlyap;

namespace {

struct CommonOpts {
    std::string out = ".";
    std::vector<std::string> formats{"csv", "json"};
    std::string window_arg;
    int grid = 101;
    double tol = 1e-10;
    double rmax = 10.0;
    int nodes = 1024;
    std::string transform_path;
    int samples = 360;
};

void add_output_options(CLI::App* cmd, CommonOpts& opt) {
    cmd->add_option("--out", opt.out, "output directory for artifacts");
    cmd->add_option("--format", opt.formats, "artifact formats: csv, json, svg")
        ->delimiter(',');
}

bool has_format(const CommonOpts& opt, const std::string& f) {
    for (const auto& s : opt.formats)
        if (s == f) return true;
    return false;
}

std::optional<Window> parse_window_arg(const std::string& arg) {
    if (arg.empty()) return std::nullopt;
    std::istringstream in(arg);
    std::vector<double> nums;
    std::string part;
    while (std::getline(in, part, ',')) nums.push_back(std::stod(part));
    if (nums.size() != 4 || !(nums[1] > nums[0]) || !(nums[3] > nums[2]))
        throw Error("cli/usage", "--window needs xmin,xmax,ymin,ymax");
    return Window{nums[0], nums[1], nums[2], nums[3]};
}

std::string artifact_path(const CommonOpts& opt, const std::string& name) {
    fs::create_directories(opt.out);
    return (fs::path(opt.out) / name).string();
}

void write_json(const CommonOpts& opt, const std::string& name, const json& j) {
    if (!has_format(opt, "json")) return;
    std::ofstream out(artifact_path(opt, name), std::ios::binary);
    if (!out) throw Error("cli/io", "cannot write '" + name + "'");
    out << j.dump(2) << "\n";
}

void print_kv(const std::string& key, const std::string& value) {
    std::cout << key << " = " << value << "\n";
}

void print_kv(const std::string& key, double value) { print_kv(key, format_double(value)); }

SystemDefinition load_system(const std::string& path, const CommonOpts& opt) {
    SystemDefinition def = read_system_file(path);
    if (!opt.transform_path.empty()) {
        SystemDefinition t = read_system_file(opt.transform_path);
        if (!t.transform_u || !t.transform_v)
            throw Error("cli/io",
                        "'" + opt.transform_path + "' must define transform_u and transform_v");
        def.transform_u = t.transform_u;
        def.transform_v = t.transform_v;
    }
    return def;
}

PipelineOptions pipeline_options(const CommonOpts& opt) {
    PipelineOptions p;
    p.window = parse_window_arg(opt.window_arg);
    p.grid_n = opt.grid;
    p.r_max = opt.rmax;
    p.cycle_samples = opt.samples;
    return p;
}

void emit_surface_csv(const CommonOpts& opt, const std::string& name, const Expr& phi,
                      const Window& w, int n) {
    if (!has_format(opt, "csv")) return;
    CsvWriter csv(artifact_path(opt, name));
    csv.row({"x", "y", "phi"});
    for (int iy = 0; iy < n; ++iy) {
        double y = w.ymin + (w.ymax - w.ymin) * iy / (n - 1);
        for (int ix = 0; ix < n; ++ix) {
            double x = w.xmin + (w.xmax - w.xmin) * ix / (n - 1);
            csv.row({format_double(x), format_double(y),
                     format_double(evaluate(phi, Bindings::xy(x, y)))});
        }
    }
}

int report_exit(const AnalysisReport& rep) {
    if (rep.exit_code != 0 && !rep.diagnostic.empty())
        std::cout << "diagnostic = " << rep.diagnostic << "\n";
    return rep.exit_code;
}

// ---------------------------------------------------------------------------

int cmd_polar(const std::string& path, const CommonOpts& opt) {
    SystemDefinition def = load_system(path, opt);
    if (!def.fx || !def.fy) throw Error("cli/io", "system definition needs fx and fy");
    PolarSystem polar = to_polar(PlanarSystem(*def.fx, *def.fy));
    RadialForm form = classify_radial_form(polar);
    print_kv("rdot", print(polar.rdot));
    print_kv("thetadot", print(polar.thetadot));
    print_kv("kind", to_string(form.kind));
    if (form.kind != RadialKind::Unclassified) print_kv("upsilon0", print(form.upsilon0));
    if (form.upsilon1) print_kv("upsilon1", print(*form.upsilon1));
    if (form.upsilon2) print_kv("upsilon2", print(*form.upsilon2));
    if (!form.diagnostic.empty()) print_kv("diagnostic", form.diagnostic);
    json j{{"rdot", print(polar.rdot)},
           {"thetadot", print(polar.thetadot)},
           {"kind", to_string(form.kind)},
           {"upsilon0", form.kind != RadialKind::Unclassified ? print(form.upsilon0) : ""},
           {"upsilon1", form.upsilon1 ? print(*form.upsilon1) : ""},
           {"upsilon2", form.upsilon2 ? print(*form.upsilon2) : ""},
           {"diagnostic", form.diagnostic}};
    write_json(opt, "polar_report.json", j);
    return 0;
}

int cmd_cycles(const std::string& path, const std::string& u0_text, const CommonOpts& opt) {
    Expr u0;
    if (!u0_text.empty()) {
        u0 = parse(u0_text);
    } else {
        if (path.empty()) throw Error("cli/usage", "cycles needs a system file or --u0");
        SystemDefinition def = load_system(path, opt);
        if (!def.fx || !def.fy) throw Error("cli/io", "system definition needs fx and fy");
        RadialForm form = classify_radial_form(to_polar(PlanarSystem(*def.fx, *def.fy)));
        if (form.kind == RadialKind::Unclassified)
            throw Error("system/unclassified", form.diagnostic);
        u0 = form.upsilon0;
    }
    auto cycles = find_cycle_radii(u0, opt.rmax);
    print_kv("upsilon0", print(u0));
    print_kv("count", std::to_string(cycles.size()));
    if (cycles.empty()) std::cout << "note = no limit cycle\n";
    json arr = json::array();
    for (size_t i = 0; i < cycles.size(); ++i) {
        const auto& c = cycles[i];
        std::cout << "cycle[" << i << "] = r*=" << format_double(c.radius) << " "
                  << to_string(c.stability) << " residual=" << format_double(c.residual)
                  << " derivative=" << format_double(c.derivative)
                  << (c.tangential ? " tangential" : "") << "\n";
        arr.push_back({{"radius", c.radius},
                       {"stability", to_string(c.stability)},
                       {"residual", c.residual},
                       {"derivative", c.derivative},
                       {"tangential", c.tangential}});
    }
    write_json(opt, "cycles_report.json",
               json{{"upsilon0", print(u0)}, {"cycles", arr}});
    return 0;
}

void print_pipeline_report(const AnalysisReport& rep) {
    print_kv("kind", rep.radial_kind);
    if (!rep.upsilon0.empty()) print_kv("upsilon0", rep.upsilon0);
    for (size_t i = 0; i < rep.cycles.size(); ++i)
        std::cout << "cycle[" << i << "] = r*=" << format_double(rep.cycles[i].radius) << " "
                  << rep.cycles[i].stability << "\n";
    if (!rep.phi_r.empty()) print_kv("phi_r", rep.phi_r);
    if (!rep.phi.empty()) print_kv("phi", rep.phi);
    if (rep.verified) {
        print_kv("phi_min", rep.phi_min);
        print_kv("lie_max", rep.lie_max);
        print_kv("stationary_count", std::to_string(rep.stationary_count));
        print_kv("infimum_certificate", rep.infimum_certificate ? "true" : "false");
    }
    if (rep.has_criteria) {
        print_kv("hp_max_abs", rep.hp_max_abs);
        print_kv("div_min", rep.div_min);
        print_kv("div_max", rep.div_max);
        print_kv("criteria", rep.criteria_verdict);
    }
    print_kv("verdict", rep.verdict);
}

int cmd_lyapunov(const std::string& path, const CommonOpts& opt) {
    SystemDefinition def = load_system(path, opt);
    PipelineOptions popt = pipeline_options(opt);
    popt.run_criteria = false;
    AnalysisReport rep = run_pipeline(def, popt);
    print_pipeline_report(rep);
    json j = rep;
    write_json(opt, "lyapunov_report.json", j);
    if (rep.exit_code == 0 && !rep.phi.empty()) {
        Window w{rep.window[0], rep.window[1], rep.window[2], rep.window[3]};
        emit_surface_csv(opt, "lyapunov_surface.csv", parse(rep.phi), w,
                         std::min(opt.grid, 201));
    }
    return report_exit(rep);
}

int cmd_pipeline(const std::string& path, const CommonOpts& opt) {
    SystemDefinition def = load_system(path, opt);
    AnalysisReport rep = run_pipeline(def, pipeline_options(opt));
    print_pipeline_report(rep);
    json j = rep;
    write_json(opt, "pipeline_report.json", j);
    if (rep.exit_code == 0 && !rep.phi.empty()) {
        Window w{rep.window[0], rep.window[1], rep.window[2], rep.window[3]};
        emit_surface_csv(opt, "phi_surface.csv", parse(rep.phi), w, std::min(opt.grid, 201));
    }
    return report_exit(rep);
}

int cmd_decompose(const std::string& path, const CommonOpts& opt) {
    SystemDefinition def = load_system(path, opt);
    PipelineOptions popt = pipeline_options(opt);
    popt.run_criteria = false;
    AnalysisReport rep = run_pipeline(def, popt);
    if (rep.exit_code != 0 || rep.phi.empty()) {
        print_pipeline_report(rep);
        return report_exit(rep);
    }
    PlanarSystem sys(*def.fx, *def.fy);
    Expr phi = parse(rep.phi);
    Decomposer dec(sys, phi);
    Window w{rep.window[0], rep.window[1], rep.window[2], rep.window[3]};
    int n = opt.grid;
    double max_residual = 0.0;
    long singular = 0;
    CsvWriter csv(artifact_path(opt, "decompose.csv"));
    csv.row({"x", "y", "D", "q", "s", "t", "H_P", "div", "singular"});
    for (int iy = 0; iy < n; ++iy) {
        double y = w.ymin + (w.ymax - w.ymin) * iy / (n - 1);
        for (int ix = 0; ix < n; ++ix) {
            double x = w.xmin + (w.xmax - w.xmin) * ix / (n - 1);
            DecompSample d = dec.at(x, y);
            csv.row({format_double(x), format_double(y), format_double(d.diffusion),
                     format_double(d.rotation), format_double(d.friction),
                     format_double(d.transverse), format_double(d.power),
                     format_double(d.div), d.singular ? "1" : "0"});
            if (d.singular)
                ++singular;
            else
                max_residual = std::max(max_residual, d.reconstruction_residual);
        }
    }
    print_kv("phi", rep.phi);
    print_kv("points", std::to_string(static_cast<long>(n) * n));
    print_kv("singular_points", std::to_string(singular));
    print_kv("max_reconstruction_residual", max_residual);
    write_json(opt, "decompose_report.json",
               json{{"phi", rep.phi},
                    {"points", static_cast<long>(n) * n},
                    {"singular_points", singular},
                    {"max_reconstruction_residual", max_residual}});
    return 0;
}

int cmd_criteria(const std::string& path, const CommonOpts& opt) {
    SystemDefinition def = load_system(path, opt);
    AnalysisReport rep = run_pipeline(def, pipeline_options(opt));
    if (!rep.has_criteria) {
        print_pipeline_report(rep);
        if (rep.exit_code != 0) return report_exit(rep);
        std::cout << "note = no limit cycle, criteria not applicable\n";
        return 0;
    }
    print_kv("samples", std::to_string(rep.cycle_samples));
    print_kv("hp_max_abs", rep.hp_max_abs);
    print_kv("div_min", rep.div_min);
    print_kv("div_max", rep.div_max);
    print_kv("criteria", rep.criteria_verdict);
    write_json(opt, "criteria_report.json",
               json{{"samples", rep.cycle_samples},
                    {"hp_max_abs", rep.hp_max_abs},
                    {"div_min", rep.div_min},
                    {"div_max", rep.div_max},
                    {"verdict", rep.criteria_verdict}});
    return 0;
}

int cmd_conformal(const std::string& path, const std::string& rho_text, const CommonOpts& opt) {
    Expr rho;
    if (!rho_text.empty()) {
        rho = parse(rho_text);
    } else {
        if (path.empty()) throw Error("cli/usage", "conformal needs a curve file or --rho");
        SystemDefinition def = read_system_file(path);
        if (!def.rho) throw Error("cli/io", "curve file must define rho=");
        rho = *def.rho;
    }
    JordanCurve curve{rho, {0.0, 0.0}};
    BoundaryMap m = theodorsen_map(curve, opt.nodes, opt.tol);
    DiffeoReport diffeo = verify_diffeomorphism(m);
    print_kv("n", std::to_string(m.n));
    print_kv("iterations", std::to_string(m.iterations));
    print_kv("residual", m.residual);
    print_kv("epsilon_max", m.epsilon_max);
    print_kv("monotonicity_margin", diffeo.monotonicity_margin);
    print_kv("periodicity_defect", diffeo.periodicity_defect);
    print_kv("spectral_tail", diffeo.spectral_tail);
    print_kv("verdict", diffeo.pass ? "pass" : "fail");
    if (has_format(opt, "csv")) {
        CsvWriter csv(artifact_path(opt, "conformal.csv"));
        csv.row({"theta", "tau", "rho"});
        for (int k = 0; k < m.n; ++k) {
            double th = kTwoPi * k / m.n;
            csv.row({format_double(th), format_double(m.tau[k]),
                     format_double(evaluate(rho, Bindings().set("theta", th)))});
        }
    }
    write_json(opt, "conformal_report.json",
               json{{"n", m.n},
                    {"iterations", m.iterations},
                    {"residual", m.residual},
                    {"epsilon_max", m.epsilon_max},
                    {"epsilon_condition_ok", m.epsilon_condition_ok},
                    {"monotonicity_margin", diffeo.monotonicity_margin},
                    {"periodicity_defect", diffeo.periodicity_defect},
                    {"spectral_tail", diffeo.spectral_tail},
                    {"verdict", diffeo.pass ? "pass" : "fail"}});
    return diffeo.pass ? 0 : 2;
}

int cmd_portrait(const std::string& path, const std::vector<std::string>& starts, double t_end,
                 const CommonOpts& opt) {
    SystemDefinition def = load_system(path, opt);
    if (!def.fx || !def.fy) throw Error("cli/io", "system definition needs fx and fy");
    PlanarSystem sys(*def.fx, *def.fy);
    Window w = parse_window_arg(opt.window_arg)
                   .value_or(def.window.value_or(Window{-2.0, 2.0, -2.0, 2.0}));
    int n = std::min(opt.grid, 41);
    VectorFieldGrid grid = sample_phase_portrait(sys, w, n, n);
    if (has_format(opt, "csv")) {
        CsvWriter csv(artifact_path(opt, "portrait.csv"));
        csv.row({"x", "y", "fx", "fy", "ok"});
        for (const auto& row : grid.rows)
            csv.row({format_double(row.x), format_double(row.y), format_double(row.fx),
                     format_double(row.fy), row.ok ? "1" : "0"});
    }
    std::vector<Trajectory> trajectories;
    for (const auto& s : starts) {
        std::istringstream in(s);
        double x0, y0;
        char comma;
        if (!(in >> x0 >> comma >> y0))
            throw Error("cli/usage", "--trajectory needs x0,y0");
        trajectories.push_back(integrate_adaptive(sys, {x0, y0}, t_end, 1e-9, 1e-12));
    }
    if (has_format(opt, "svg"))
        write_portrait_svg(artifact_path(opt, "portrait.svg"), grid, trajectories);
    print_kv("grid", std::to_string(n) + "x" + std::to_string(n));
    print_kv("trajectories", std::to_string(trajectories.size()));
    return 0;
}

int cmd_equiv(const std::string& path1, const std::string& path2, const CommonOpts& opt) {
    SystemDefinition d1 = read_system_file(path1);
    SystemDefinition d2 = read_system_file(path2);
    if (!d1.fx || !d1.fy || !d2.fx || !d2.fy)
        throw Error("cli/io", "both system definitions need fx and fy");
    PlanarSystem s1(*d1.fx, *d1.fy), s2(*d2.fx, *d2.fy);
    Window w = parse_window_arg(opt.window_arg)
                   .value_or(d1.window.value_or(Window{-2.0, 2.0, -2.0, 2.0}));
    long skipped = 0;
    double residual = parallelism_residual(s1, s2, w, opt.grid, &skipped);
    print_kv("cartesian_residual", residual);
    print_kv("skipped_points", std::to_string(skipped));

    EquivalenceReport rep = shared_attractors(to_polar(s1), to_polar(s2), opt.rmax);
    print_kv("polar_residual", rep.parallelism_residual);
    json cycles = json::array();
    for (const auto& e : rep.shared_cycles) {
        std::cout << "cycle r*=" << format_double(e.radius) << " in_first="
                  << (e.in_first ? "1" : "0") << " in_second=" << (e.in_second ? "1" : "0")
                  << "\n";
        cycles.push_back(
            {{"radius", e.radius}, {"in_first", e.in_first}, {"in_second", e.in_second}});
    }
    json fixed = json::array();
    for (const auto& e : rep.shared_fixed_points)
        fixed.push_back(
            {{"radius", e.radius}, {"in_first", e.in_first}, {"in_second", e.in_second}});
    print_kv("verdict", to_string(rep.verdict));
    write_json(opt, "equiv_report.json",
               json{{"cartesian_residual", residual},
                    {"skipped_points", skipped},
                    {"polar_residual", rep.parallelism_residual},
                    {"shared_cycles", cycles},
                    {"shared_fixed_points", fixed},
                    {"verdict", to_string(rep.verdict)}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov potentials for planar limit-cycle systems"};
    app.require_subcommand(1);

    CommonOpts opt;
    std::string system_path, system_path2, u0_text, rho_text;
    std::vector<std::string> trajectory_starts;
    double t_end = 30.0;

    auto* polar = app.add_subcommand("polar", "polar form and radial classification");
    polar->add_option("system", system_path, "system definition file")->required();
    add_output_options(polar, opt);

    auto* cycles = app.add_subcommand("cycles", "limit-cycle radii of the radial factor");
    cycles->add_option("system", system_path, "system definition file");
    cycles->add_option("--u0", u0_text, "radial right-hand side expression in r");
    cycles->add_option("--rmax", opt.rmax, "search bound for cycle radii");
    add_output_options(cycles, opt);

    auto* lyap = app.add_subcommand("lyapunov", "construct and verify a potential");
    lyap->add_option("system", system_path, "system definition file")->required();
    lyap->add_option("--window", opt.window_arg, "verification window xmin,xmax,ymin,ymax");
    lyap->add_option("--grid", opt.grid, "verification grid size");
    lyap->add_option("--rmax", opt.rmax, "radial bound");
    lyap->add_option("--transform", opt.transform_path, "transform definition file");
    add_output_options(lyap, opt);

    auto* dec = app.add_subcommand("decompose", "pointwise field decomposition CSV");
    dec->add_option("system", system_path, "system definition file")->required();
    dec->add_option("--window", opt.window_arg, "sampling window");
    dec->add_option("--grid", opt.grid, "sampling grid size");
    dec->add_option("--rmax", opt.rmax, "radial bound");
    dec->add_option("--transform", opt.transform_path, "transform definition file");
    add_output_options(dec, opt);

    auto* crit = app.add_subcommand("criteria", "dissipation criteria on the cycle");
    crit->add_option("system", system_path, "system definition file")->required();
    crit->add_option("--n", opt.samples, "cycle sample count");
    crit->add_option("--rmax", opt.rmax, "radial bound");
    crit->add_option("--transform", opt.transform_path, "transform definition file");
    add_output_options(crit, opt);

    auto* conf = app.add_subcommand("conformal", "boundary correspondence of a star-shaped curve");
    conf->add_option("curve", system_path, "curve file with rho=");
    conf->add_option("--rho", rho_text, "radius function rho(theta)");
    conf->add_option("--n", opt.nodes, "node count (power of two)");
    conf->add_option("--tol", opt.tol, "fixed-point tolerance");
    add_output_options(conf, opt);

    auto* port = app.add_subcommand("portrait", "vector-field grid and phase portrait");
    port->add_option("system", system_path, "system definition file")->required();
    port->add_option("--window", opt.window_arg, "sampling window");
    port->add_option("--grid", opt.grid, "grid size (capped at 41 for plots)");
    port->add_option("--trajectory", trajectory_starts, "overlay trajectory from x0,y0");
    port->add_option("--tend", t_end, "trajectory integration time");
    add_output_options(port, opt);

    auto* eq = app.add_subcommand("equiv", "orbit-equivalence proxies for two systems");
    eq->add_option("system1", system_path, "first system definition file")->required();
    eq->add_option("system2", system_path2, "second system definition file")->required();
    eq->add_option("--window", opt.window_arg, "comparison window");
    eq->add_option("--grid", opt.grid, "comparison grid size");
    eq->add_option("--rmax", opt.rmax, "radial bound");
    add_output_options(eq, opt);

    auto* pipe = app.add_subcommand("pipeline", "full analysis pipeline");
    pipe->add_option("system", system_path, "system definition file")->required();
    pipe->add_option("--transform", opt.transform_path, "transform definition file");
    pipe->add_option("--window", opt.window_arg, "verification window");
    pipe->add_option("--grid", opt.grid, "verification grid size");
    pipe->add_option("--rmax", opt.rmax, "radial bound");
    pipe->add_option("--n", opt.samples, "cycle sample count for the criteria");
    add_output_options(pipe, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (polar->parsed()) return cmd_polar(system_path, opt);
        if (cycles->parsed()) return cmd_cycles(system_path, u0_text, opt);
        if (lyap->parsed()) return cmd_lyapunov(system_path, opt);
        if (dec->parsed()) return cmd_decompose(system_path, opt);
        if (crit->parsed()) return cmd_criteria(system_path, opt);
        if (conf->parsed()) return cmd_conformal(system_path, rho_text, opt);
        if (port->parsed()) return cmd_portrait(system_path, trajectory_starts, t_end, opt);
        if (eq->parsed()) return cmd_equiv(system_path, system_path2, opt);
        if (pipe->parsed()) return cmd_pipeline(system_path, opt);
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
