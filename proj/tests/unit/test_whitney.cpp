#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "slitkit/errors.hpp"
#include "slitkit/whitney.hpp"

using namespace slitkit;

namespace {

XRPolynomial tangential(std::initializer_list<Rational> coeffs) {
    XRPolynomial Q(2);
    int j = 0;
    for (const auto& c : coeffs) Q.set(Monomial{{j++, 0}, 0}, c);
    return Q;
}

SlitGeometry parabola(int k) { return SlitGeometry::graph(Polynomial1D({0, 0, Rational(1, 4)}), 1.0, k); }

}  // namespace

TEST_CASE("one-dimensional moments against a fine midpoint sum") {
    for (int k = 0; k <= 2; ++k) {
        const auto rho = build_mollifier(1, k);
        constexpr int N = 1000000;
        for (int j = 0; j <= k + 2; ++j) {
            double sum = 0.0;
            for (int i = 0; i < N; ++i) {
                const double x = -0.5 + (i + 0.5) / N;
                sum += rho(std::span<const double>(&x, 1)) * std::pow(x, j);
            }
            sum /= N;
            CHECK(std::abs(sum - (j == 0 ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("two-dimensional moments against a Cartesian midpoint sum") {
    const auto rho = build_mollifier(2, 1);
    constexpr int N = 1200;
    std::vector<double> sums(rho.basis.size(), 0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const std::array<double, 2> x{-0.5 + (i + 0.5) / N, -0.5 + (j + 0.5) / N};
            const double v = rho(x);
            if (v == 0.0) continue;
            for (std::size_t b = 0; b < sums.size(); ++b)
                sums[b] += v * std::pow(x[0], rho.basis[b].mu[0]) * std::pow(x[1], rho.basis[b].mu[1]);
        }
    for (std::size_t b = 0; b < sums.size(); ++b)
        CHECK(std::abs(sums[b] / (double(N) * N) - (rho.basis[b].x_degree() == 0 ? 1.0 : 0.0)) < 1e-10);
}

TEST_CASE("moment conditions hold to 1e-12 for every supported order") {
    for (int n = 1; n <= 2; ++n)
        for (int k = 0; k <= 4; ++k) {
            const auto rho = build_mollifier(n, k);
            CHECK(rho.moment_error <= 1e-12);
            CHECK(rho.basis.size() == (n == 1 ? std::size_t(k + 3) : std::size_t((k + 3) * (k + 4) / 2)));
        }
    CHECK_THROWS_AS(build_mollifier(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_mollifier(1, -1), std::invalid_argument);
}

TEST_CASE("mollification reproduces polynomials of degree k + 2") {
    const auto rho1 = build_mollifier(1, 1);
    const auto rule1 = mollifier_rule(rho1);
    auto p1 = [](std::span<const double> x) { return x[0] * x[0] * x[0] - 2 * x[0] + 1; };
    for (double x : {-0.3, 0.0, 0.4}) {
        for (double scale : {0.1, 0.5}) {
            CHECK(std::abs(mollify(rule1, p1, std::span<const double>(&x, 1), scale) - p1({&x, 1})) < 1e-8);
        }
    }

    const auto rho2 = build_mollifier(2, 2);
    const auto rule2 = mollifier_rule(rho2);
    auto p2 = [](std::span<const double> x) { return 1 + x[0] * x[1] - 3 * x[1] * x[1] * x[1] * x[0] + x[0] * x[0]; };
    const std::array<double, 2> X{0.2, -0.1};
    CHECK(std::abs(mollify(rule2, p2, X, 0.3) - p2(X)) < 1e-8);
}

TEST_CASE("flat extension reproduces Q") {
    const auto geom = SlitGeometry::flat(2);
    for (int k = 0; k <= 2; ++k) {
        XRPolynomial Q = tangential({1, -1, Rational(3, 2)});
        if (k >= 1) Q.set(Monomial{{3, 0}, 0}, 2);
        if (k >= 2) Q.set(Monomial{{4, 0}, 0}, -1);
        const WhitneyExtension E(Q, geom, build_mollifier(2, k));
        for (const std::array<double, 2>& x :
             {std::array<double, 2>{0.1, 0.2}, {-0.3, -0.05}, {0.25, 0.4}, {0.0, -0.3}}) {
            const std::array<double, 2> y{x[0], 0.0};
            CHECK(std::abs(E(x) - Q.evaluate(y, 0.0)) < 1e-8);
        }
    }
}

TEST_CASE("extension equals Q o y' on Gamma and is continuous there") {
    const auto geom = parabola(0);
    const WhitneyExtension E(tangential({0, 1, 1}), geom, build_mollifier(2, 0));
    for (double s : {-0.3, 0.0, 0.2}) {
        const std::array<double, 2> z{s, geom.g_at(s)};
        CHECK(E(z) == doctest::Approx(s + s * s).epsilon(1e-12));
        const double gp = geom.dg_at(s), J = std::sqrt(1 + gp * gp);
        const std::array<double, 2> near{s - 1e-4 * gp / J, z[1] + 1e-4 / J};
        CHECK(std::abs(E(near) - (s + s * s)) < 1e-6);
    }
}

TEST_CASE("curved normal jet defect decays at rate at least k + 1") {
    for (int k = 0; k <= 1; ++k) {
        const WhitneyExtension E(tangential({0, 0, 1}), parabola(k), build_mollifier(2, k));
        const auto rows = verify_jet_match(E, 0.0, 1, {0.2, 0.1, 0.05, 0.025, 0.0125});
        REQUIRE(rows.front().order == -1);
        CHECK(rows.front().approach_rate >= k + 1);
        // order 0 and 1 jets match on Gamma
        for (const auto& row : rows) CHECK(row.defect < 1e-8);
    }
}

TEST_CASE("second-order jets agree on Gamma up to O(t)") {
    const WhitneyExtension E(tangential({0, 0, 1}), parabola(1), build_mollifier(2, 1));
    const auto rows = verify_jet_match(E, 0.0, 2, {0.1, 0.05, 0.025, 0.0125});
    CHECK(rows.back().order == 2);
    CHECK(rows.back().approach_rate > 0.8);
    std::ostringstream csv;
    write_defect_csv(rows, csv);
    CHECK(csv.str().rfind("order,defect,approach_rate\n", 0) == 0);
}

TEST_CASE("extension is bounded by the coefficients") {
    const auto geom = parabola(0);
    const auto rho = build_mollifier(2, 0);
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), pos(-0.35, 0.35);
    for (int trial = 0; trial < 5; ++trial) {
        const XRPolynomial Q = tangential({coef(gen), coef(gen), coef(gen)});
        double qmax = 0.0;
        for (const auto& [m, c] : Q.terms()) qmax = std::max(qmax, std::abs(to_double(c)));
        const WhitneyExtension E(Q, geom, rho);
        for (int i = 0; i < 10; ++i) {
            const std::array<double, 2> x{pos(gen), pos(gen)};
            CHECK(std::abs(E(x)) <= 3.0 * qmax);
        }
    }
}

TEST_CASE("whitney error paths") {
    const auto geom = parabola(0);
    const auto rho = build_mollifier(2, 0);
    XRPolynomial bad(2);
    bad.set(Monomial{{0, 1}, 0}, 1);
    CHECK_THROWS_AS(WhitneyExtension(bad, geom, rho), std::invalid_argument);
    CHECK_THROWS_AS(WhitneyExtension(tangential({0, 0, 0, 1}), geom, rho), std::invalid_argument);
    const WhitneyExtension E(tangential({1}), geom, rho);
    const std::array<double, 2> far{0.7, -0.6};
    CHECK_THROWS_AS(E(far), OutOfChart);
    CHECK_THROWS_AS(verify_jet_match(E, 0.0, 3, {0.1, 0.05}), OrderTooHigh);
    CHECK_THROWS_AS(verify_jet_match(E, 0.3, 1, {0.1, 0.05}), NotNormalized);
}
