// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "limitlyap/limitlyap.hpp"

using namespace limitlyap;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;

void criterion(int num, const std::string& name, const std::function<void()>& body) {
    std::string detail;
    bool ok = true;
    try {
        body();
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    std::printf("criterion %02d %-58s %s\n", num, name.c_str(), ok ? "PASS" : "FAIL");
    if (!ok) {
        std::printf("             %s\n", detail.c_str());
        ++g_failures;
    }
}

void require(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

std::string fixture(const std::string& name) {
    return (fs::path(LIMITLYAP_FIXTURE_DIR) / name).string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json run_cli_pipeline(const std::string& fixture_path, const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("limitlyap_acceptance_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string cmd = std::string(LIMITLYAP_CLI_PATH) + " pipeline " + fixture_path + " --out " +
                      dir.string() + " > " + (dir / "stdout.txt").string() + " 2>&1";
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    require(code == 0, "pipeline exited with " + std::to_string(code) + ": " +
                           slurp(dir / "stdout.txt"));
    return json::parse(slurp(dir / "pipeline_report.json"));
}

PlanarSystem circular_system() {
    return PlanarSystem(parse("-y + x*(1 - (x^2 + y^2))"), parse("x + y*(1 - (x^2 + y^2))"));
}

PlanarSystem vibration_system() {
    return PlanarSystem(parse("y"), parse("-(4*x^2 - 1)*y - x + x^3 - x^5"));
}

Expr hat_potential() { return parse("(x^2 + y^2)*(x^2 + y^2 - 2)/4"); }

Expr vibration_potential() {
    return parse("(x^2 + (y - x + x^3)^2) * ((x^2 + (y - x + x^3)^2) - 2) / 4");
}

double radial_closed_form(double r0, double t) {
    return 1.0 / std::sqrt(1.0 + (1.0 / (r0 * r0) - 1.0) * std::exp(-2.0 * t));
}

} // namespace

int main() {
    criterion(1, "potential reproduction (pipeline reproduces the hat potential)", [] {
        json rep = run_cli_pipeline(fixture("circular.sys"), "c1");
        Expr phi = parse(rep["potential"]["phi"].get<std::string>());
        require(poly_equal(phi, hat_potential()), // 1e-12 relative on [-2,2]^2
                "emitted phi differs from (x^2+y^2)(x^2+y^2-2)/4");
        require(rep["verdict"].get<std::string>() == "pass", "pipeline verdict is not pass");
        require(rep["criteria"]["verdict"].get<std::string>() == "disagree",
                "criteria verdict is not 'disagree'");
    });

    criterion(2, "Lie-derivative reproduction and non-positivity", [] {
        Expr lie = lie_derivative(hat_potential(), circular_system());
        require(poly_equal(lie, parse("-(x^2 + y^2)*(x^2 + y^2 - 1)^2")), // 1e-12 relative
                "Lie derivative differs from -(x^2+y^2)(x^2+y^2-1)^2");
        LyapunovReport ver =
            verify_lyapunov(hat_potential(), circular_system(), Window{-2, 2, -2, 2}, 101);
        require(ver.lie_max <= 1e-9,
                "max Lie derivative " + format_double(ver.lie_max) + " exceeds 1e-9");
    });

    criterion(3, "divergence equals -2 on the cycle", [] {
        Expr div = divergence(circular_system());
        for (int k = 0; k < 360; ++k) {
            double th = kTwoPi * k / 360;
            double v = evaluate(div, Bindings::xy(std::cos(th), std::sin(th)));
            require(std::abs(v + 2.0) <= 1e-12,
                    "divergence " + format_double(v) + " at sample " + std::to_string(k));
        }
    });

    criterion(4, "dissipative power vanishes on the cycle, criteria disagree", [] {
        auto cycles = find_cycle_radii(parse("r - r^3"));
        require(cycles.size() == 1, "expected exactly one cycle");
        CriteriaReport rep = criteria_report(circular_system(), hat_potential(), cycles[0], 360);
        require(rep.hp_max_abs <= 1e-9,
                "max |H_P| " + format_double(rep.hp_max_abs) + " exceeds 1e-9");
        require(rep.disagree, "criteria verdict is not 'disagree'");
    });

    criterion(5, "energy identity H_P + grad(phi).f = 0 at 1e4 random points", [] {
        struct Fixture {
            PlanarSystem s;
            Expr phi;
        };
        std::vector<Fixture> fixtures{{circular_system(), hat_potential()},
                                      {vibration_system(), vibration_potential()}};
        std::mt19937 rng(20240801);
        std::uniform_real_distribution<double> pt(-2.0, 2.0);
        for (auto& fix : fixtures) {
            Decomposer dec(fix.s, fix.phi);
            Expr gx = differentiate(fix.phi, "x");
            Expr gy = differentiate(fix.phi, "y");
            for (int i = 0; i < 10000; ++i) {
                double x = pt(rng), y = pt(rng);
                DecompSample d = dec.at(x, y);
                Bindings b = Bindings::xy(x, y);
                double dot = evaluate(gx, b) * evaluate(fix.s.fx, b) +
                             evaluate(gy, b) * evaluate(fix.s.fy, b);
                double scale = 1.0 + std::max(std::abs(d.power), std::abs(dot));
                require(std::abs(d.power + dot) <= 1e-12 * scale,
                        "identity violated at (" + format_double(x) + ", " + format_double(y) +
                            ")");
            }
        }
    });

    criterion(6, "transformed-system pipeline reproduces its potential", [] {
        json rep = run_cli_pipeline(fixture("vibration.sys"), "c6");
        Expr phi = parse(rep["potential"]["phi"].get<std::string>());
        Expr expected = vibration_potential();
        for (int iy = 0; iy <= 20; ++iy) {
            for (int ix = 0; ix <= 20; ++ix) {
                double x = -1.5 + 3.0 * ix / 20;
                double y = -1.5 + 3.0 * iy / 20;
                Bindings b = Bindings::xy(x, y);
                double a = evaluate(phi, b), e = evaluate(expected, b);
                require(std::abs(a - e) <= 1e-10 * (1.0 + std::abs(e)),
                        "phi mismatch at (" + format_double(x) + ", " + format_double(y) + ")");
            }
        }
        require(rep["lyapunov"]["lie_max"].get<double>() <= 1e-9,
                "Lie derivative exceeds 1e-9 on the verification grid");
    });

    criterion(7, "cycle detection: r* = 1, stable, derivative -2", [] {
        // radial factors of the circular system and of the transformed
        // vibration system
        std::vector<PlanarSystem> systems{circular_system(),
                                          PlanarSystem(parse("y + x - x^3"),
                                                       parse("-x^2*y - x"))};
        for (auto& s : systems) {
            RadialForm form = classify_radial_form(to_polar(s));
            require(form.kind != RadialKind::Unclassified, "radial form unclassified");
            auto cycles = find_cycle_radii(form.upsilon0);
            require(cycles.size() == 1, "expected one cycle");
            require(std::abs(cycles[0].radius - 1.0) <= 1e-10,
                    "radius " + format_double(cycles[0].radius));
            require(cycles[0].stability == Stability::Stable, "not classified stable");
            require(std::abs(cycles[0].derivative + 2.0) <= 1e-9,
                    "derivative " + format_double(cycles[0].derivative));
        }
    });

    criterion(8, "decomposition reconstruction and spot values at (2,0)", [] {
        PlanarSystem s = circular_system();
        Expr phi = hat_potential();
        Decomposer dec(s, phi);
        std::mt19937 rng(1234);
        std::uniform_real_distribution<double> pt(-2.0, 2.0);
        for (int i = 0; i < 2000; ++i) {
            DecompSample d = dec.at(pt(rng), pt(rng));
            if (d.singular) continue;
            require(d.reconstruction_residual <= 1e-10,
                    "reconstruction residual " + format_double(d.reconstruction_residual));
        }
        DecompSample d = dec.at(2.0, 0.0);
        require(std::abs(d.diffusion - 1.0) <= 1e-12, "D != 1");
        require(std::abs(d.rotation - 1.0 / 3.0) <= 1e-12, "q != 1/3");
        require(std::abs(d.power - 36.0) <= 1e-12 * 36.0, "H_P != 36");
        // independent 2x2 linear-solve oracle at the same point
        Bindings b = Bindings::xy(2.0, 0.0);
        double fx = evaluate(s.fx, b), fy = evaluate(s.fy, b);
        double gx = evaluate(differentiate(phi, "x"), b);
        double gy = evaluate(differentiate(phi, "y"), b);
        double det = -gx * gx - gy * gy;
        double D = ((-fx) * (-gx) - gy * (-fy)) / det;
        double q = (gx * (-fy) - (-fx) * gy) / det;
        require(std::abs(d.diffusion - D) <= 1e-12, "oracle D mismatch");
        require(std::abs(d.rotation - q) <= 1e-12, "oracle q mismatch");
    });

    criterion(9, "boundary correspondence: identity circle and ellipse", [] {
        BoundaryMap id = theodorsen_map(JordanCurve{parse("1")});
        for (int k = 0; k < id.n; ++k)
            require(std::abs(id.tau[k] - kTwoPi * k / id.n) <= 1e-12, "identity map deviates");

        JordanCurve ellipse{parse("0.96/sqrt(0.64*cos(theta)^2 + 1.44*sin(theta)^2)")};
        BoundaryMap m = theodorsen_map(ellipse, 1024, 1e-10, 200);
        require(m.iterations <= 200, "too many iterations");
        require(m.residual <= 1e-10, "residual " + format_double(m.residual));
        DiffeoReport diffeo = verify_diffeomorphism(m);
        require(diffeo.monotonicity_margin > 0.0, "tau not strictly monotone");
        require(diffeo.periodicity_defect <= 1e-10,
                "periodicity defect " + format_double(diffeo.periodicity_defect));
        BoundaryMap m2 = theodorsen_map(ellipse, 2048, 1e-10, 200);
        for (int k = 0; k < m.n; ++k)
            require(std::abs(m.tau[k] - m2.tau[2 * k]) <= 1e-8, "n vs 2n disagreement");
    });

    criterion(10, "integrator order >= 3.9 and convergence onto the cycle", [] {
        PlanarSystem radial(parse("x - x^3"), parse("0"));
        double expected = radial_closed_form(0.5, 1.0);
        double e1 = std::abs(integrate_rk4(radial, {0.5, 0.0}, 1.0, 0.1).back()[0] - expected);
        double e2 = std::abs(integrate_rk4(radial, {0.5, 0.0}, 1.0, 0.05).back()[0] - expected);
        double order = std::log2(e1 / e2);
        require(order >= 3.9, "empirical order " + format_double(order));
        PlanarSystem s = circular_system();
        for (double x0 : {0.1, 2.0}) {
            Trajectory traj = integrate_adaptive(s, {x0, 0.0}, 50.0, 1e-9, 1e-12);
            double r = std::hypot(traj.back()[0], traj.back()[1]);
            require(std::abs(r - 1.0) <= 1e-6,
                    "|r(50) - 1| = " + format_double(std::abs(r - 1.0)) + " from x0 = " +
                        format_double(x0));
        }
    });

    criterion(11, "orbit-equivalence proxies", [] {
        PlanarSystem s = circular_system();
        PlanarSystem scaled(simplify(Expr::constant(3.0) * s.fx),
                            simplify(Expr::constant(3.0) * s.fy));
        double res = parallelism_residual(s, scaled, Window{-2, 2, -2, 2}, 41);
        require(res <= 1e-15, "scaling residual " + format_double(res));

        PolarSystem coupled(parse("r*(1 - r^2)*(r*cos(theta) + 1/2)"), parse("1"));
        PolarSystem circular(parse("r - r^3"), parse("1"));
        EquivalenceReport rep = shared_attractors(coupled, circular);
        require(rep.shared_cycles.size() == 1, "expected one shared cycle");
        require(std::abs(rep.shared_cycles[0].radius - 1.0) <= 1e-10,
                "shared radius " + format_double(rep.shared_cycles[0].radius));
        require(rep.shared_cycles[0].in_first && rep.shared_cycles[0].in_second,
                "cycle not present in both systems");
        require(rep.verdict == EquivVerdict::SameAttractorsOnly,
                std::string("verdict ") + to_string(rep.verdict));
    });

    if (g_failures == 0) {
        std::printf("all 11 criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
