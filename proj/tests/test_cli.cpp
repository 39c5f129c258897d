#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "limitlyap/expr.hpp"

using namespace limitlyap;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() /
                   ("limitlyap_cli_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    fs::path out = dir / "stdout.txt";
    fs::path err = dir / "stderr.txt";
    std::string cmd = std::string(LIMITLYAP_CLI_PATH) + " " + args + " > " + out.string() +
                      " 2> " + err.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string fixture(const std::string& name) {
    return (fs::path(LIMITLYAP_FIXTURE_DIR) / name).string();
}

} // namespace

TEST_CASE("cli pipeline on the circular fixture") {
    fs::path dir = fresh_dir("pipeline_circular");
    RunResult r = run_cli("pipeline " + fixture("circular.sys") + " --out " + dir.string(), dir);
    INFO(r.out << r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("verdict = pass") != std::string::npos);
    CHECK(r.out.find("criteria = disagree") != std::string::npos);

    json rep = json::parse(slurp(dir / "pipeline_report.json"));
    Expr phi = parse(rep["potential"]["phi"].get<std::string>());
    CHECK(poly_equal(phi, parse("(x^2 + y^2)*(x^2 + y^2 - 2)/4")));
    CHECK(rep["lyapunov"]["pass"].get<bool>());
    CHECK(rep["criteria"]["verdict"].get<std::string>() == "disagree");
    CHECK(rep["exit_code"].get<int>() == 0);
    CHECK(fs::exists(dir / "phi_surface.csv"));

    SECTION("artifacts are byte-identical across runs") {
        fs::path dir2 = fresh_dir("pipeline_circularb");
        RunResult r2 =
            run_cli("pipeline " + fixture("circular.sys") + " --out " + dir2.string(), dir2);
        REQUIRE(r2.exit_code == 0);
        CHECK(slurp(dir / "pipeline_report.json") == slurp(dir2 / "pipeline_report.json"));
        CHECK(slurp(dir / "phi_surface.csv") == slurp(dir2 / "phi_surface.csv"));
    }
}

TEST_CASE("cli pipeline with the rectifying transform") {
    fs::path dir = fresh_dir("pipeline_vibration");
    RunResult r = run_cli("pipeline " + fixture("vibration.sys") + " --out " + dir.string(), dir);
    INFO(r.out << r.err);
    REQUIRE(r.exit_code == 0);
    json rep = json::parse(slurp(dir / "pipeline_report.json"));
    Expr phi = parse(rep["potential"]["phi"].get<std::string>());
    Expr expected = parse("(x^2 + (y - x + x^3)^2) * ((x^2 + (y - x + x^3)^2) - 2) / 4");
    CHECK(poly_equal(phi, expected));
    CHECK(rep["lyapunov"]["lie_max"].get<double>() <= 1e-9);

    SECTION("--transform file equals in-file transform keys") {
        fs::path dir2 = fresh_dir("pipeline_vib_tf");
        RunResult r2 = run_cli("pipeline " + fixture("vibration_plain.sys") + " --transform " +
                                   fixture("rectify_transform.sys") + " --out " + dir2.string(),
                               dir2);
        REQUIRE(r2.exit_code == 0);
        json rep2 = json::parse(slurp(dir2 / "pipeline_report.json"));
        CHECK(rep2["potential"]["phi"] == rep["potential"]["phi"]);
    }
}

TEST_CASE("cli cycles") {
    SECTION("no limit cycle note for the gradient fixture") {
        fs::path dir = fresh_dir("cycles_grad");
        RunResult r = run_cli("cycles " + fixture("gradient.sys") + " --out " + dir.string(), dir);
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("no limit cycle") != std::string::npos);
    }
    SECTION("--u0 accepts a radial expression") {
        fs::path dir = fresh_dir("cycles_u0");
        RunResult r = run_cli("cycles --u0 \"r - r^3\" --out " + dir.string(), dir);
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("r*=1") != std::string::npos);
        CHECK(r.out.find("stable") != std::string::npos);
    }
}

TEST_CASE("cli exit codes") {
    SECTION("verification failure exits 2") {
        fs::path dir = fresh_dir("unstable");
        RunResult r =
            run_cli("pipeline " + fixture("unstable.sys") + " --out " + dir.string(), dir);
        CHECK(r.exit_code == 2);
        CHECK(r.out.find("verdict = fail") != std::string::npos);
        CHECK(r.out.find("infimum") != std::string::npos);
    }
    SECTION("missing input exits 1") {
        fs::path dir = fresh_dir("missing");
        RunResult r = run_cli("pipeline /nonexistent.sys --out " + dir.string(), dir);
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("cli/io") != std::string::npos);
    }
    SECTION("usage error exits 1") {
        fs::path dir = fresh_dir("usage");
        RunResult r = run_cli("frobnicate", dir);
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("cli lyapunov and decompose") {
    SECTION("lyapunov emits surface samples") {
        fs::path dir = fresh_dir("lyap");
        RunResult r = run_cli("lyapunov " + fixture("circular.sys") + " --grid 41 --out " +
                                  dir.string(),
                              dir);
        REQUIRE(r.exit_code == 0);
        CHECK(r.out.find("phi = ") != std::string::npos);
        std::string csv = slurp(dir / "lyapunov_surface.csv");
        CHECK(csv.rfind("x,y,phi", 0) == 0);
    }
    SECTION("decompose emits the per-point table") {
        fs::path dir = fresh_dir("decomp");
        RunResult r = run_cli("decompose " + fixture("circular.sys") + " --grid 21 --out " +
                                  dir.string(),
                              dir);
        REQUIRE(r.exit_code == 0);
        std::string csv = slurp(dir / "decompose.csv");
        CHECK(csv.rfind("x,y,D,q,s,t,H_P,div,singular", 0) == 0);
        CHECK(r.out.find("max_reconstruction_residual") != std::string::npos);
    }
}

TEST_CASE("cli criteria") {
    fs::path dir = fresh_dir("criteria");
    RunResult r = run_cli("criteria " + fixture("circular.sys") + " --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("criteria = disagree") != std::string::npos);
    json rep = json::parse(slurp(dir / "criteria_report.json"));
    CHECK(rep["hp_max_abs"].get<double>() <= 1e-9);
    CHECK(rep["div_max"].get<double>() == Catch::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("cli conformal") {
    fs::path dir = fresh_dir("conformal");
    RunResult r = run_cli("conformal " + fixture("ellipse.curve") + " --out " + dir.string(), dir);
    INFO(r.out << r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("verdict = pass") != std::string::npos);
    std::string csv = slurp(dir / "conformal.csv");
    CHECK(csv.rfind("theta,tau,rho", 0) == 0);

    SECTION("--rho flag without a file") {
        fs::path dir2 = fresh_dir("conformal_rho");
        RunResult r2 = run_cli("conformal --rho \"1\" --n 256 --out " + dir2.string(), dir2);
        REQUIRE(r2.exit_code == 0);
        CHECK(r2.out.find("iterations = 1") != std::string::npos);
    }
}

TEST_CASE("cli portrait") {
    fs::path dir = fresh_dir("portrait");
    RunResult r = run_cli("portrait " + fixture("rotation.sys") +
                              " --grid 9 --format csv,svg --trajectory 1,0 --out " + dir.string(),
                          dir);
    INFO(r.out << r.err);
    REQUIRE(r.exit_code == 0);
    std::string csv = slurp(dir / "portrait.csv");
    CHECK(csv.rfind("x,y,fx,fy,ok", 0) == 0);
    std::string svg = slurp(dir / "portrait.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("cli equiv") {
    fs::path dir = fresh_dir("equiv");
    RunResult r = run_cli("equiv " + fixture("coupled.sys") + " " + fixture("circular.sys") +
                              " --grid 41 --out " + dir.string(),
                          dir);
    INFO(r.out << r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("verdict = same-attractors-only") != std::string::npos);
    json rep = json::parse(slurp(dir / "equiv_report.json"));
    CHECK(rep["cartesian_residual"].get<double>() > 1e-3);
    REQUIRE(rep["shared_cycles"].size() == 1);
    CHECK(rep["shared_cycles"][0]["radius"].get<double>() == Catch::Approx(1.0).margin(1e-10));
}
