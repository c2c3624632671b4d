#pragma once

#include <array>
#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "slitkit/rational.hpp"

namespace slitkit {

inline constexpr int kMaxDim = 2;

/// Exponent pair (mu, m) of the monomial x^mu r^m. Entries of mu past the
/// spatial dimension are always zero.
struct Monomial {
    std::array<int, kMaxDim> mu{};
    int m = 0;

    int x_degree() const { return mu[0] + mu[1]; }
    int degree() const { return x_degree() + m; }

    auto operator<=>(const Monomial&) const = default;
};

/// Calls fn(Monomial) for every monomial in n x-variables (plus r when
/// with_r) of total degree <= max_degree, ordered by degree, then by m.
template <class Fn>
void for_each_monomial(int n, int max_degree, bool with_r, Fn&& fn) {
    for (int deg = 0; deg <= max_degree; ++deg) {
        for (int m = 0; m <= (with_r ? deg : 0); ++m) {
            const int rest = deg - m;
            if (n == 1) {
                fn(Monomial{{rest, 0}, m});
            } else {
                for (int a = rest; a >= 0; --a) fn(Monomial{{a, rest - a}, m});
            }
        }
    }
}

/// Polynomial in (x_1..x_n, r) with exact rational coefficients. Polynomials
/// in x alone are stored with m = 0 throughout.
class XRPolynomial {
public:
    using Terms = std::map<Monomial, Rational>;

    explicit XRPolynomial(int n = 1);

    static XRPolynomial constant(int n, const Rational& c);
    static XRPolynomial monomial(int n, const Monomial& mono, const Rational& c = 1);
    static XRPolynomial x(int n, int i);  // i is 0-based
    static XRPolynomial r(int n);

    int dim() const { return n_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Rational coeff(const Monomial& mono) const;
    void set(const Monomial& mono, const Rational& c);
    void add(const Monomial& mono, const Rational& c);

    /// -1 for the zero polynomial.
    int degree() const;
    int r_degree() const;
    /// max |a_{mu m}|
    Rational norm() const;

    XRPolynomial truncated(int max_degree) const;
    XRPolynomial homogeneous_part(int degree) const;
    /// d/dx_i with r held fixed (0-based i).
    XRPolynomial dx(int i) const;
    XRPolynomial dr() const;
    /// Drops every term containing r (evaluation at r = 0).
    XRPolynomial at_r_zero() const;

    double evaluate(std::span<const double> x, double r) const;
    Rational evaluate(std::span<const Rational> x, const Rational& r) const;

    XRPolynomial& operator+=(const XRPolynomial& other);
    XRPolynomial& operator-=(const XRPolynomial& other);
    XRPolynomial& operator*=(const Rational& c);

    friend XRPolynomial operator+(XRPolynomial a, const XRPolynomial& b) { return a += b; }
    friend XRPolynomial operator-(XRPolynomial a, const XRPolynomial& b) { return a -= b; }
    friend XRPolynomial operator*(XRPolynomial a, const Rational& c) { return a *= c; }
    friend XRPolynomial operator*(const Rational& c, XRPolynomial a) { return a *= c; }
    friend XRPolynomial operator-(XRPolynomial a) { return a *= Rational(-1); }
    friend XRPolynomial operator*(const XRPolynomial& a, const XRPolynomial& b);

    friend bool operator==(const XRPolynomial&, const XRPolynomial&) = default;

    /// Product truncated at max_degree without forming the full product.
    static XRPolynomial multiply_truncated(const XRPolynomial& a, const XRPolynomial& b,
                                           int max_degree);

    std::string to_string() const;

private:
    int n_;
    Terms terms_;
};

/// Rows `mu_1,...,mu_n,m,coeff_num,coeff_den`, one per stored term.
std::string to_csv(const XRPolynomial& p);
XRPolynomial xrpoly_from_csv(int n, const std::string& text);

/// Univariate polynomial with rational coefficients, used for the graph g.
class Polynomial1D {
public:
    Polynomial1D() = default;
    explicit Polynomial1D(std::vector<Rational> coeffs);

    const std::vector<Rational>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }

    double operator()(double t) const { return derivative_value(t, 0); }
    Rational operator()(const Rational& t) const;
    /// j-th derivative at t.
    double derivative_value(double t, int j) const;
    Polynomial1D derivative() const;
    /// q(s) = p(t0 + s).
    Polynomial1D shifted(const Rational& t0) const;

private:
    std::vector<Rational> coeffs_;  // ascending powers, trailing zeros trimmed
};

}  // namespace slitkit
