#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "limitlyap/cycle.hpp"

using namespace limitlyap;

namespace {

// dense-sampling root-count oracle: sign changes over 1e6 samples
int dense_root_count(const Expr& u0, double r_max) {
    const int n = 1000000;
    int count = 0;
    double prev = evaluate(u0, Bindings().set("r", 1e-6));
    for (int i = 1; i <= n; ++i) {
        double r = 1e-6 + (r_max - 1e-6) * i / n;
        double v = evaluate(u0, Bindings().set("r", r));
        if (prev != 0.0 && v != 0.0 && (prev < 0.0) != (v < 0.0)) ++count;
        if (v != 0.0) prev = v;
    }
    return count;
}

double radial_closed_form(double r0, double t) {
    return 1.0 / std::sqrt(1.0 + (1.0 / (r0 * r0) - 1.0) * std::exp(-2.0 * t));
}

} // namespace

TEST_CASE("find_cycle_radii") {
    SECTION("single stable cycle of r - r^3") {
        auto cycles = find_cycle_radii(parse("r - r^3"));
        REQUIRE(cycles.size() == 1);
        CHECK(std::abs(cycles[0].radius - 1.0) <= 1e-10);
        CHECK(cycles[0].stability == Stability::Stable);
        CHECK(cycles[0].residual <= 1e-12);
        CHECK(cycles[0].derivative == Catch::Approx(-2.0).epsilon(1e-9));
        CHECK_FALSE(cycles[0].tangential);
    }
    SECTION("globally attracting origin has no cycle") {
        CHECK(find_cycle_radii(parse("-r")).empty());
        CHECK(find_cycle_radii(parse("-r - r^3")).empty());
    }
    SECTION("nested cycles of r(1-r^2)(4-r^2)") {
        // sign table oracle: + at 0.5, - at 1.5, + at 2.5 -> roots at 1 and 2
        Expr u0 = parse("r*(1 - r^2)*(4 - r^2)");
        CHECK(evaluate(u0, Bindings().set("r", 0.5)) > 0.0);
        CHECK(evaluate(u0, Bindings().set("r", 1.5)) < 0.0);
        CHECK(evaluate(u0, Bindings().set("r", 2.5)) > 0.0);
        auto cycles = find_cycle_radii(u0);
        REQUIRE(cycles.size() == 2);
        CHECK(std::abs(cycles[0].radius - 1.0) <= 1e-10);
        CHECK(cycles[0].stability == Stability::Stable);
        CHECK(cycles[0].derivative == Catch::Approx(-6.0).epsilon(1e-9));
        CHECK(std::abs(cycles[1].radius - 2.0) <= 1e-10);
        CHECK(cycles[1].stability == Stability::Unstable);
        CHECK(cycles[1].derivative == Catch::Approx(24.0).epsilon(1e-9));
    }
    SECTION("results are sorted and satisfy the residual bound") {
        Expr u0 = parse("(r - 0.5)*(r - 1.5)*(r - 2.5)*(r - 9)");
        auto cycles = find_cycle_radii(u0);
        REQUIRE(cycles.size() == 4);
        for (size_t i = 0; i < cycles.size(); ++i) {
            CHECK(cycles[i].residual <= 1e-12);
            if (i > 0) CHECK(cycles[i].radius > cycles[i - 1].radius);
        }
    }
    SECTION("root count matches the dense-sampling oracle") {
        std::vector<std::string> polys{"r - r^3", "r*(1 - r^2)*(4 - r^2)", "-r",
                                       "(r - 0.5)*(r - 1.5)*(r - 2.5)*(r - 9)",
                                       "r*(r - 3)*(r - 3.002)"};
        for (const auto& text : polys) {
            Expr u0 = parse(text);
            auto cycles = find_cycle_radii(u0);
            int non_tangential = 0;
            for (const auto& c : cycles)
                if (!c.tangential) ++non_tangential;
            INFO("polynomial " << text);
            CHECK(non_tangential == dense_root_count(u0, 10.0));
        }
    }
    SECTION("tangential double root is reported semi-stable with a warning") {
        auto cycles = find_cycle_radii(parse("r*(1 - r^2)^2"));
        REQUIRE(cycles.size() == 1);
        CHECK(std::abs(cycles[0].radius - 1.0) <= 1e-8);
        CHECK(cycles[0].stability == Stability::SemiStable);
        CHECK(cycles[0].tangential);
        CHECK(cycles[0].residual <= 1e-12);
    }
    SECTION("degenerate odd root with vanishing derivative is still classified") {
        auto cycles = find_cycle_radii(parse("-(r - 1)^3"));
        REQUIRE(cycles.size() == 1);
        CHECK(cycles[0].stability == Stability::Stable);
    }
}

TEST_CASE("verify_cycle_by_return_map on the circular system") {
    PolarSystem p(parse("r - r^3"), parse("1"));
    auto cycles = find_cycle_radii(p.rdot);
    REQUIRE(cycles.size() == 1);

    SECTION("residuals shrink and match the closed form") {
        ReturnMapReport rep = verify_cycle_by_return_map(p, cycles[0], 0.3);
        CHECK(rep.return_map_mode);
        REQUIRE(rep.inner_residuals.size() == 10);
        CHECK(rep.inner_residuals.back() < 1e-6);
        CHECK(rep.outer_residuals.back() < 1e-6);
        CHECK(rep.inner_monotone);
        CHECK(rep.outer_monotone);
        // oracle: theta advances like time here, so r(2 pi k) has a closed form
        for (int k = 1; k <= 3; ++k) {
            double expect_in = std::abs(radial_closed_form(0.7, kTwoPi * k) - 1.0);
            double expect_out = std::abs(radial_closed_form(1.3, kTwoPi * k) - 1.0);
            CHECK(std::abs(rep.inner_residuals[k - 1] - expect_in) <= 1e-8);
            CHECK(std::abs(rep.outer_residuals[k - 1] - expect_out) <= 1e-8);
        }
    }
    SECTION("delta = 0 stays on the cycle") {
        ReturnMapReport rep = verify_cycle_by_return_map(p, cycles[0], 0.0);
        CHECK(rep.inner_residuals.back() <= 1e-9);
        CHECK(rep.outer_residuals.back() <= 1e-9);
    }
    SECTION("invalid delta") {
        CHECK_THROWS_AS(verify_cycle_by_return_map(p, cycles[0], 0.6), Error);
    }
}

TEST_CASE("verify_cycle_by_return_map with reversed angular motion") {
    // thetadot = -1 - cos sin <= -1/2, so the return map runs clockwise
    PolarSystem p(parse("r*(1 - r^2)*cos(theta)^2"), parse("-1 - cos(theta)*sin(theta)"));
    PolarSystem reference(parse("r - r^3"), parse("1"));
    auto cycles = find_cycle_radii(parse("r - r^3"));
    REQUIRE(cycles.size() == 1);

    ReturnMapReport rep = verify_cycle_by_return_map(p, cycles[0], 0.3);
    CHECK(rep.return_map_mode);
    CHECK(rep.inner_monotone);
    CHECK(rep.outer_monotone);

    // decay is slower than the pure-radial reference (cos^2 factor)
    ReturnMapReport ref = verify_cycle_by_return_map(reference, cycles[0], 0.3);
    CHECK(rep.inner_residuals[0] > ref.inner_residuals[0]);
    CHECK(rep.outer_residuals[0] > ref.outer_residuals[0]);

    // integrator-derived residual: two tolerance settings 100x apart agree
    ReturnMapReport loose = verify_cycle_by_return_map(p, cycles[0], 0.3, 1e-7, 1e-10);
    CHECK(std::abs(rep.inner_residuals[0] - loose.inner_residuals[0]) <= 1e-6);
    CHECK(std::abs(rep.outer_residuals[0] - loose.outer_residuals[0]) <= 1e-6);
}

TEST_CASE("verify_cycle_by_return_map falls back when thetadot vanishes") {
    PolarSystem p(parse("r - r^3"), parse("cos(theta)"));
    auto cycles = find_cycle_radii(p.rdot);
    REQUIRE(cycles.size() == 1);
    ReturnMapReport rep = verify_cycle_by_return_map(p, cycles[0], 0.3);
    CHECK_FALSE(rep.return_map_mode);
    CHECK(rep.note.find("thetadot-vanishes") != std::string::npos);
    CHECK(rep.inner_residuals.back() < 1e-6); // radius still converges in forward time
    CHECK(rep.outer_residuals.back() < 1e-6);
}
