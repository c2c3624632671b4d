#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "slitkit/errors.hpp"
#include "slitkit/freeboundary.hpp"

using namespace slitkit;

namespace {

const AngleFunction kHalf = [](double t) { return std::cos(0.5 * t); };

TipProblem constant_G(double s) {
    TipProblem p;
    p.phi = kHalf;
    p.G = [s](double) { return s; };
    return p;
}

}  // namespace

TEST_CASE("mobius factor and pull back") {
    CHECK(mobius_factor(0.0) == 1.0);
    CHECK(mobius_factor(0.6) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK_THROWS_AS(mobius_factor(1.0), std::invalid_argument);

    const double g = 0.4;
    const AngleFunction angle = [](double t) { return t; };
    const AngleFunction back = pull_back(angle, g);
    for (double phi : {-2.5, -1.0, 0.3, 1.7, 3.0}) {
        // T(e^{i back(phi)}) = e^{i phi}
        const std::complex<double> z = std::polar(1.0, back(phi));
        const std::complex<double> w = (z - g) / (1.0 - g * z);
        CHECK(std::abs(w - std::polar(1.0, phi)) < 1e-14);
    }
    // the slit end -1 stays fixed
    CHECK(std::abs(std::abs(back(M_PI)) - M_PI) < 1e-14);
}

TEST_CASE("tip coefficient at the centred tip") {
    CHECK(tip_coefficient(0.0, kHalf) == doctest::Approx(1.0).epsilon(1e-12));
    const AngleFunction two = [](double t) { return std::cos(0.5 * t) + 0.25 * std::cos(1.5 * t); };
    const TipSolution sol = tip_solution(0.0, two);
    CHECK(sol.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(sol.series.c[1] - 0.25) < 1e-12);
    CHECK(sol.factor == 1.0);
}

TEST_CASE("tip coefficient is linear in the data") {
    for (double g : {-0.5, 0.0, 0.3, 0.7}) {
        const double a = tip_coefficient(g, kHalf);
        for (double s : {0.5, 2.0, 3.75}) {
            const AngleFunction scaled = [s](double t) { return s * std::cos(0.5 * t); };
            CHECK(std::abs(tip_coefficient(g, scaled) - s * a) <= 1e-12 * s * a);
        }
    }
}

TEST_CASE("moved tip agrees with a uniform grid solve") {
    const double a = tip_coefficient(0.3, kHalf);
    const double fd = fd_tip_coefficient(0.3, kHalf, std::ldexp(1.0, -7));
    CHECK(std::abs(a - fd) < 0.01 * a);
    const double left = tip_coefficient(-0.3, kHalf);
    CHECK(std::abs(left - fd_tip_coefficient(-0.3, kHalf, std::ldexp(1.0, -7))) < 0.01 * left);
    CHECK(left < 1.0);
    CHECK(a > 1.0);
}

TEST_CASE("free boundary with unit flux is the centred tip") {
    const FreeBoundaryResult res = solve_free_boundary(constant_G(1.0));
    CHECK(std::abs(res.gamma) <= 1e-6);
    CHECK(std::abs(res.residual) < 1e-9);
    CHECK_FALSE(res.multiple_roots);
    REQUIRE(res.expansion.size() == 64);
    CHECK(res.expansion[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("larger flux moves the tip toward the peak of the data") {
    const double s = 1.05;
    const FreeBoundaryResult res = solve_free_boundary(constant_G(s));
    CHECK(std::abs(res.residual) < 1e-9);
    // coarse scan oracle: the sign change of a - s on a 0.01 grid
    double lo = -0.5;
    for (int i = 0; i <= 100; ++i) {
        const double g = -0.5 + 0.01 * i;
        if (tip_coefficient(g, kHalf) < s) lo = g;
    }
    CHECK(res.gamma > 0.0);
    CHECK(res.gamma >= lo - 1e-12);
    CHECK(res.gamma <= lo + 0.01 + 1e-12);
}

TEST_CASE("non-constant flux") {
    TipProblem p;
    p.phi = kHalf;
    p.G = [](double g) { return 1.0 + 0.5 * g * g; };
    const FreeBoundaryResult res = solve_free_boundary(p);
    CHECK(std::abs(tip_coefficient(res.gamma, kHalf) - p.G(res.gamma)) < 1e-9);
}

TEST_CASE("several roots are reported") {
    TipProblem p;
    p.phi = kHalf;
    // chord of the convex a(gamma) through gamma = 0 and 0.3
    const double slope = (tip_coefficient(0.3, kHalf) - 1.0) / 0.3;
    p.G = [slope](double g) { return 1.0 + slope * g; };
    p.lo = -0.2;
    p.hi = 0.6;
    const FreeBoundaryResult res = solve_free_boundary(p);
    CHECK(res.multiple_roots);
    REQUIRE(res.roots.size() >= 2);
    CHECK(std::abs(res.roots[0]) < 1e-6);
    CHECK(std::abs(res.roots.back() - 0.3) < 1e-6);
}

TEST_CASE("free boundary errors") {
    CHECK_THROWS_AS(solve_free_boundary(constant_G(5.0)), NoBracket);
    CHECK_THROWS_AS(solve_free_boundary(constant_G(-1.0)), std::invalid_argument);
    TipProblem p = constant_G(1.0);
    p.hi = 1.0;
    CHECK_THROWS_AS(solve_free_boundary(p), std::invalid_argument);
    p = constant_G(1.0);
    p.phi = nullptr;
    CHECK_THROWS_AS(solve_free_boundary(p), std::invalid_argument);
}

TEST_CASE("free boundary csv") {
    std::ostringstream out;
    write_free_boundary_csv(solve_free_boundary(constant_G(1.0)), out);
    const std::string s = out.str();
    CHECK(s.rfind("gamma,a,residual,multiple_roots\n", 0) == 0);
    CHECK(s.find("q,coefficient\n0.5,") != std::string::npos);
}

TEST_CASE("energy near the unit-flux tip") {
    const CriticalityReport rep = energy_criticality(kHalf, 0.0, 0.05, std::ldexp(1.0, -6));
    CHECK(std::isfinite(rep.e_center));
    CHECK(rep.e_center > 0.0);
    MESSAGE("energy at -dg, 0, +dg: " << rep.e_minus << ", " << rep.e_center << ", " << rep.e_plus);
}
