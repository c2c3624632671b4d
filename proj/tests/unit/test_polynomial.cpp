#include <doctest.h>

#include <random>

#include "slitkit/polynomial.hpp"

using namespace slitkit;

TEST_CASE("rational literals parse exactly") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational(" -6/8 ") == Rational(-3, 4));
    CHECK(parse_rational("-0.25") == Rational(-1, 4));
    CHECK(parse_rational("1.5e-2") == Rational(3, 200));
    CHECK(parse_rational("7") == Rational(7));
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("abc"));
    CHECK(to_string(Rational(-3, 4)) == "-3/4");
    CHECK(to_string(Rational(5)) == "5");
    CHECK(rational_from_double(0.375) == Rational(3, 8));
    CHECK(to_double(rational_from_double(0.1)) == 0.1);
}

TEST_CASE("monomial enumeration is ordered by degree then r-power") {
    std::vector<Monomial> seen;
    for_each_monomial(2, 2, true, [&](const Monomial& m) { seen.push_back(m); });
    // 1 + 3 + 6 monomials in (x1, x2, r) up to degree 2
    REQUIRE(seen.size() == 10);
    CHECK(seen[0] == Monomial{});
    for (size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1].degree() <= seen[i].degree());
    int count = 0;
    for_each_monomial(1, 3, false, [&](const Monomial&) { ++count; });
    CHECK(count == 4);
}

TEST_CASE("polynomial algebra") {
    const auto x1 = XRPolynomial::x(2, 0);
    const auto x2 = XRPolynomial::x(2, 1);
    const auto r = XRPolynomial::r(2);
    const auto P = x2 - Rational(1, 2) * r;
    CHECK(P.degree() == 1);
    CHECK(P.coeff(Monomial{{0, 1}, 0}) == 1);
    CHECK(P.coeff(Monomial{{0, 0}, 1}) == Rational(-1, 2));
    CHECK((P - P).is_zero());
    const auto Q = P * (x1 + r);
    CHECK(Q.degree() == 2);
    CHECK(Q.coeff(Monomial{{0, 0}, 2}) == Rational(-1, 2));
    CHECK(Q.dr() == (x2 - r) - Rational(1, 2) * x1);
    CHECK(Q.dx(0) == P);
    CHECK(Q.truncated(1).is_zero());
    CHECK(Q.at_r_zero() == x1 * x2);
    CHECK(P.norm() == 1);
    CHECK(P.to_string() == "-1/2*r + x2");
}

TEST_CASE("product evaluation is exact and multiplicative") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> coeff(-5, 5);
    for (int trial = 0; trial < 20; ++trial) {
        XRPolynomial a(2), b(2);
        for_each_monomial(2, 3, true, [&](const Monomial& m) {
            a.add(m, Rational(coeff(rng), 1 + std::abs(coeff(rng))));
            b.add(m, Rational(coeff(rng), 3));
        });
        const std::array<Rational, 2> x{Rational(1, 3), Rational(-2, 7)};
        const Rational rr(5, 11);
        CHECK((a * b).evaluate(x, rr) == a.evaluate(x, rr) * b.evaluate(x, rr));
        CHECK((a + b).evaluate(x, rr) == a.evaluate(x, rr) + b.evaluate(x, rr));
        CHECK(XRPolynomial::multiply_truncated(a, b, 3) == (a * b).truncated(3));
    }
}

TEST_CASE("CSV round trip") {
    XRPolynomial p(2);
    p.set(Monomial{{2, 0}, 0}, 1);
    p.set(Monomial{{0, 0}, 1}, Rational(-1, 2));
    p.set(Monomial{{1, 1}, 1}, Rational(7, 3));
    const std::string csv = to_csv(p);
    CHECK(xrpoly_from_csv(2, csv) == p);
    CHECK_THROWS(xrpoly_from_csv(2, "1,2,3\n"));
}

TEST_CASE("univariate polynomial shift and derivatives") {
    const Polynomial1D g({0, 0, Rational(1, 4), Rational(1, 3)});
    CHECK(g.degree() == 3);
    CHECK(g(Rational(2)) == Rational(1) + Rational(8, 3));
    CHECK(g.derivative_value(2.0, 1) == doctest::Approx(1.0 + 4.0));
    CHECK(g.derivative_value(2.0, 2) == doctest::Approx(0.5 + 4.0));
    CHECK(g.derivative_value(2.0, 4) == 0.0);
    const Polynomial1D h = g.shifted(Rational(1, 2));
    for (int j = 0; j < 5; ++j) {
        const Rational t(j - 2, 3);
        CHECK(h(t) == g(t + Rational(1, 2)));
    }
    CHECK(Polynomial1D({1, 0, 0}).degree() == 0);
}
