#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "limitlyap/conformal.hpp"

using namespace limitlyap;

namespace {

JordanCurve ellipse_curve(double a, double b) {
    // rho(theta) = a b / sqrt(b^2 cos^2 + a^2 sin^2)
    std::string text = format_double(a * b) + "/sqrt(" + format_double(b * b) +
                       "*cos(theta)^2 + " + format_double(a * a) + "*sin(theta)^2)";
    return JordanCurve{parse(text), {0.0, 0.0}};
}

// direct O(n^2) trigonometric coefficients, independent of the library FFT
void direct_coefficients(const std::vector<double>& samples, std::vector<double>& cos_c,
                         std::vector<double>& sin_c, int m_max) {
    int n = static_cast<int>(samples.size());
    cos_c.assign(m_max + 1, 0.0);
    sin_c.assign(m_max + 1, 0.0);
    for (int k = 0; k < n; ++k) cos_c[0] += samples[k] / n;
    for (int m = 1; m <= m_max; ++m) {
        for (int k = 0; k < n; ++k) {
            double th = kTwoPi * k / n;
            cos_c[m] += 2.0 / n * samples[k] * std::cos(m * th);
            sin_c[m] += 2.0 / n * samples[k] * std::sin(m * th);
        }
    }
}

} // namespace

TEST_CASE("theodorsen_map trivial curves") {
    SECTION("unit circle maps by the identity in one iteration") {
        BoundaryMap m = theodorsen_map(JordanCurve{parse("1")});
        CHECK(m.iterations == 1);
        CHECK(m.residual == 0.0);
        for (int k = 0; k < m.n; ++k)
            REQUIRE(std::abs(m.tau[k] - kTwoPi * k / m.n) <= 1e-12);
    }
    SECTION("scaling leaves the correspondence unchanged") {
        BoundaryMap m = theodorsen_map(JordanCurve{parse("2")});
        CHECK(m.iterations == 1);
        for (int k = 0; k < m.n; ++k)
            REQUIRE(std::abs(m.tau[k] - kTwoPi * k / m.n) <= 1e-12);
    }
}

TEST_CASE("theodorsen_map on the ellipse") {
    JordanCurve c = ellipse_curve(1.2, 0.8);
    BoundaryMap m = theodorsen_map(c, 1024, 1e-10, 200);
    CHECK(m.iterations <= 200);
    CHECK(m.residual <= 1e-10);
    CHECK(m.epsilon_condition_ok);

    SECTION("strict monotonicity and degree 1") {
        for (int k = 0; k + 1 < m.n; ++k) REQUIRE(m.tau[k + 1] > m.tau[k]);
        CHECK(m.tau[0] + kTwoPi > m.tau[m.n - 1]);
    }

    SECTION("oracle: ln rho(tau) and tau - theta are conjugate series") {
        std::vector<double> u(m.n), t_part(m.n);
        for (int k = 0; k < m.n; ++k) {
            u[k] = std::log(evaluate(c.rho, Bindings().set("theta", m.tau[k])));
            t_part[k] = m.tau[k] - kTwoPi * k / m.n;
        }
        const int m_max = 48;
        std::vector<double> ua, ub, ta, tb;
        direct_coefficients(u, ua, ub, m_max);
        direct_coefficients(t_part, ta, tb, m_max);
        CHECK(std::abs(ta[0]) <= 1e-12);
        for (int k = 1; k <= m_max; ++k) {
            INFO("harmonic " << k);
            REQUIRE(std::abs(ta[k] + ub[k]) <= 1e-8); // cos part of conjugate = -b_k
            REQUIRE(std::abs(tb[k] - ua[k]) <= 1e-8); // sin part of conjugate = a_k
        }
    }

    SECTION("resolution stability: n vs 2n agree at common nodes") {
        BoundaryMap m2 = theodorsen_map(c, 2048, 1e-10, 200);
        for (int k = 0; k < m.n; ++k)
            REQUIRE(std::abs(m.tau[k] - m2.tau[2 * k]) <= 1e-8);
    }

    SECTION("symmetry: even rho gives odd tau") {
        for (double th : {0.3, 1.1, 2.4, 3.0}) {
            double plus = map_curve_to_circle(c, m, th);
            double minus = map_curve_to_circle(c, m, -th);
            REQUIRE(std::abs(plus + minus) <= 1e-9);
        }
    }
}

TEST_CASE("map_curve_to_circle") {
    JordanCurve circle{parse("1")};
    BoundaryMap id = theodorsen_map(circle);
    CHECK(map_curve_to_circle(circle, id, 1.3) == Catch::Approx(1.3).margin(1e-15));

    SECTION("exact 2 pi periodicity of the lifted map") {
        JordanCurve c = ellipse_curve(1.2, 0.8);
        BoundaryMap m = theodorsen_map(c);
        // theta = 0 vs theta = 2 pi differ by exactly 2 pi
        CHECK(map_curve_to_circle(c, m, kTwoPi) - map_curve_to_circle(c, m, 0.0) == kTwoPi);
        // away from 0 the shift is exact up to the rounding of theta + 2 pi
        for (double th : {0.7, 2.0}) {
            double lo = map_curve_to_circle(c, m, th);
            double hi = map_curve_to_circle(c, m, th + kTwoPi);
            REQUIRE(std::abs(hi - lo - kTwoPi) <= 1e-12);
        }
    }

    SECTION("interpolation agrees with a doubled-resolution run") {
        JordanCurve c = ellipse_curve(1.2, 0.8);
        BoundaryMap m1 = theodorsen_map(c, 1024);
        BoundaryMap m2 = theodorsen_map(c, 2048);
        for (double th : {kPi / 4, 0.123, 2.9, 5.5})
            REQUIRE(std::abs(map_curve_to_circle(c, m1, th) - map_curve_to_circle(c, m2, th)) <=
                    1e-8);
    }
}

TEST_CASE("verify_diffeomorphism") {
    SECTION("identity map") {
        BoundaryMap m = theodorsen_map(JordanCurve{parse("1")});
        DiffeoReport rep = verify_diffeomorphism(m);
        CHECK(rep.monotonicity_margin == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(rep.periodicity_defect == 0.0);
        CHECK(rep.pass);
    }
    SECTION("ellipse map") {
        BoundaryMap m = theodorsen_map(ellipse_curve(1.2, 0.8));
        DiffeoReport rep = verify_diffeomorphism(m);
        CHECK(rep.monotonicity_margin > 0.0);
        CHECK(rep.periodicity_defect <= 1e-10);
        CHECK(rep.spectral_tail <= 1e-8);
        CHECK(rep.pass);
    }
    SECTION("swapped samples fail the monotonicity check") {
        BoundaryMap m = theodorsen_map(ellipse_curve(1.2, 0.8));
        std::swap(m.tau[100], m.tau[101]);
        DiffeoReport rep = verify_diffeomorphism(m);
        CHECK(rep.monotonicity_margin < 0.0);
        CHECK_FALSE(rep.pass);
    }
}

TEST_CASE("theodorsen_map error paths") {
    SECTION("argument validation") {
        CHECK_THROWS_AS(theodorsen_map(JordanCurve{parse("1")}, 1000), Error); // not a power of 2
        CHECK_THROWS_AS(theodorsen_map(JordanCurve{parse("1")}, 1024, -1.0), Error);
    }
    SECTION("curve validation") {
        try {
            theodorsen_map(JordanCurve{parse("cos(theta)")}); // not positive
            FAIL("expected invalid-curve");
        } catch (const Error& e) {
            CHECK(e.code() == std::string("conformal/invalid-curve"));
        }
        CHECK_THROWS_AS(theodorsen_map(JordanCurve{parse("1 + theta")}), Error); // not periodic
        CHECK_THROWS_AS(theodorsen_map(JordanCurve{parse("1 + r")}), Error); // wrong variable
    }
    SECTION("divergent iteration reports not-converged") {
        // |rho'/rho| = 2 |sin| violates the epsilon-condition and the fixed
        // point iteration does not settle
        JordanCurve wild{parse("exp(2*cos(theta))")};
        try {
            theodorsen_map(wild, 256, 1e-10, 40);
            FAIL("expected not-converged");
        } catch (const Error& e) {
            CHECK(e.code() == std::string("conformal/not-converged"));
        }
    }
}
