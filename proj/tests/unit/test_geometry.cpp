#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "slitkit/errors.hpp"
#include "slitkit/geometry.hpp"

using namespace slitkit;

namespace {

SlitGeometry parabola() { return SlitGeometry::graph(Polynomial1D({0, 0, Rational(1, 4)})); }

Frame frame_at(const SlitGeometry& geom, std::array<double, 3> X) {
    return closest_point_frame(geom, std::span<const double>(X.data(), geom.n + 1));
}

}  // namespace

TEST_CASE("flat frames") {
    const auto flat = SlitGeometry::flat(2);
    auto f = frame_at(flat, {0.0, 1.0 - 1e-9, 0.0});
    CHECK(f.d == doctest::Approx(1.0));
    CHECK(f.r == doctest::Approx(1.0));
    CHECK(f.theta == 0.0);
    CHECK(f.u0 == doctest::Approx(1.0));
    CHECK(f.nu[1] == 1.0);

    f = frame_at(flat, {0.0, -0.5, 0.0});
    CHECK(f.d == -0.5);
    CHECK(f.theta == doctest::Approx(M_PI));
    CHECK(f.u0 == 0.0);

    f = frame_at(flat, {0.0, -0.5, -0.0});
    CHECK(f.theta == M_PI);

    const auto tip = SlitGeometry::flat(1);
    f = frame_at(tip, {0.3, 0.4, 0.0});
    CHECK(f.r == doctest::Approx(0.5));
    CHECK(f.u0 * f.u0 == doctest::Approx(0.5 * (0.3 + 0.5)));
}

TEST_CASE("curved frame against brute-force minimization") {
    const auto geom = parabola();
    const auto g = [](double t) { return 0.25 * t * t; };
    const auto f = frame_at(geom, {0.0, 0.1, 0.0});
    CHECK(f.z[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.d == doctest::Approx(0.1));
    CHECK(f.nu[0] == doctest::Approx(0.0));
    CHECK(f.nu[1] == doctest::Approx(1.0));

    // curvature at z from -Laplacian of the brute-force distance field, extrapolated to d = 0
    auto dist = [&](std::array<double, 3> X) { return oracle::graph_distance(g, X[0], X[1])[1]; };
    const double h = 1e-3;
    const double k1 = -oracle::laplacian(dist, {0.0, 0.1, 0.0}, 2, h);
    const double k2 = -oracle::laplacian(dist, {0.0, 0.05, 0.0}, 2, h);
    CHECK(2.0 * k2 - k1 == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(f.kappa == doctest::Approx(k1).epsilon(1e-3));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-0.4, 0.4);
    for (int trial = 0; trial < 50; ++trial) {
        const double x1 = U(rng), x2 = U(rng), y = U(rng);
        const auto fr = frame_at(geom, {x1, x2, y});
        const auto ref = oracle::graph_distance(g, x1, x2);
        CHECK(fr.z[0] == doctest::Approx(ref[0]).epsilon(1e-8));
        CHECK(fr.d == doctest::Approx(ref[1]).epsilon(1e-8));
    }
}

TEST_CASE("frame invariants at random points") {
    const auto geom = parabola();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-0.45, 0.45);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 3> X{U(rng), U(rng), U(rng)};
        if (std::abs(X[2]) < 0.02) X[2] = 0.02;
        const auto f = frame_at(geom, X);
        CHECK(f.u0 * f.u0 == doctest::Approx(0.5 * (f.d + f.r)).epsilon(1e-13));
        CHECK(f.r * f.r == doctest::Approx(f.d * f.d + X[2] * X[2]).epsilon(1e-13));
        CHECK(std::hypot(f.nu[0], f.nu[1]) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(f.d) <= f.r);
        CHECK(std::abs(f.r * std::cos(f.theta) - f.d) < 1e-14);
        CHECK(std::abs(f.r * std::sin(f.theta) - X[2]) < 1e-14);

        // grad_x r = (d/r) nu and grad_x U0 = (U0/2r) nu at O(h^2)
        const double h = 1e-5;
        for (int i = 0; i < 2; ++i) {
            auto plus = X, minus = X;
            plus[i] += h;
            minus[i] -= h;
            const auto fp = frame_at(geom, plus);
            const auto fm = frame_at(geom, minus);
            CHECK((fp.r - fm.r) / (2 * h) == doctest::Approx(f.d / f.r * f.nu[i]).epsilon(1e-6));
            CHECK((fp.u0 - fm.u0) / (2 * h) ==
                  doctest::Approx(f.u0 / (2 * f.r) * f.nu[i]).epsilon(1e-5));
        }
    }
}

TEST_CASE("Laplacian of U0 is -kappa U0 / (2r) on a curved edge") {
    const auto geom = parabola();
    auto u0 = [&](std::array<double, 3> X) { return frame_at(geom, X).u0; };
    for (const std::array<double, 3> X : {std::array<double, 3>{0.05, 0.1, 0.08},
                                          std::array<double, 3>{-0.1, -0.02, 0.1},
                                          std::array<double, 3>{0.2, 0.05, -0.05}}) {
        const auto f = frame_at(geom, X);
        const double lap = oracle::laplacian(u0, X, 3, 1e-4);
        CHECK(lap == doctest::Approx(-f.kappa * f.u0 / (2 * f.r)).epsilon(1e-4));
    }
}

TEST_CASE("jets of the flat geometry") {
    const auto jet = gamma_jet(SlitGeometry::flat(2), 0, 1);
    CHECK(jet.d == XRPolynomial::x(2, 1));
    CHECK(jet.nu[0].is_zero());
    CHECK(jet.nu[1] == XRPolynomial::constant(2, 1));
    CHECK(jet.kappa.is_zero());
    const auto jet1 = gamma_jet(SlitGeometry::flat(1), 0, 1);
    CHECK(jet1.d == XRPolynomial::x(1, 0));
}

TEST_CASE("jets of the parabola") {
    const auto geom = SlitGeometry::graph(Polynomial1D({0, 0, Rational(1, 4)}), 1.0, 2);
    const auto jet = gamma_jet(geom, 0, 3);
    CHECK(jet.kappa.coeff(Monomial{}) == Rational(1, 2));
    // d(nu^1)/dx1 = -g''(0) from nu = (-g', 1)/sqrt(1 + g'^2)
    CHECK(jet.nu[0].coeff(Monomial{{1, 0}, 0}) == Rational(-1, 2));
    CHECK(jet.d.coeff(Monomial{{0, 1}, 0}) == 1);
    CHECK(jet.d.coeff(Monomial{{2, 0}, 0}) == Rational(-1, 4));
    CHECK(jet.tangent.coeff(Monomial{{1, 0}, 0}) == 1);

    const auto f0 = frame_at(geom, {0.0, 0.0, 0.0});
    CHECK(std::abs(jet.d.evaluate(std::array<double, 2>{0, 0}, 0)) < 1e-12);
    CHECK(std::abs(jet.kappa.evaluate(std::array<double, 2>{0, 0}, 0) - f0.kappa) < 1e-12);
    CHECK(std::abs(jet.nu[1].evaluate(std::array<double, 2>{0, 0}, 0) - f0.nu[1]) < 1e-12);

    // Taylor remainder of d decays at the stored order + 1
    const int N = jet.d.degree();
    double prev = 0.0;
    for (double t : {0.2, 0.1, 0.05}) {
        const std::array<double, 2> x{0.6 * t, 0.8 * t};
        const auto f = frame_at(geom, {x[0], x[1], 0.0});
        const double err = std::abs(jet.d.evaluate(x, 0) - f.d);
        const double errs = std::abs(jet.tangent.evaluate(x, 0) - f.s);
        if (prev > 0.0) CHECK(std::log2(prev / err) > N + 0.7);
        prev = err;
        CHECK(errs < 50 * std::pow(t, N + 1));
    }
}

TEST_CASE("jets at a shifted base point") {
    const auto geom = SlitGeometry::graph(Polynomial1D({0, 0, 0, Rational(1, 6)}), 1.0, 1);
    const auto jet = gamma_jet(geom, 0, 2);
    CHECK(jet.kappa.coeff(Monomial{}) == 0);
    CHECK(jet.kappa.coeff(Monomial{{1, 0}, 0}) == 1);
    CHECK_THROWS_AS(gamma_jet(geom, Rational(1, 2), 1), NotNormalized);
}

TEST_CASE("geometry errors") {
    const auto geom = parabola();
    std::array<double, 3> far{0.9, 0.5, 0.0};
    CHECK_THROWS_AS(closest_point_frame(geom, far), OutOfDomain);
    CHECK_THROWS_AS(gamma_jet(geom, 0, 2), OrderTooHigh);
    CHECK_THROWS_AS(SlitGeometry::graph(Polynomial1D({1, 0, 1})), InvalidGeometry);
    CHECK_THROWS_AS(SlitGeometry::graph(Polynomial1D({0, 1})), InvalidGeometry);
    CHECK_THROWS_AS(SlitGeometry::graph(Polynomial1D({0, 0, 2})), InvalidGeometry);
    CHECK_THROWS_AS(SlitGeometry::flat(3), InvalidGeometry);
    const auto big = SlitGeometry::graph(Polynomial1D({0, 0, Rational(1, 2)})).dilated(Rational(1, 2));
    CHECK(big.g.coeffs()[2] == Rational(1, 4));
    CHECK_THROWS_AS(SlitGeometry::graph(Polynomial1D({0, 0, Rational(1, 2)})).dilated(4), InvalidGeometry);
}
