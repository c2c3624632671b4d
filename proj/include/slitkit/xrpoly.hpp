#pragma once

#include <climits>
#include <map>

#include "slitkit/geometry.hpp"
#include "slitkit/polynomial.hpp"

namespace slitkit {

/// Delta(U0 * P) = (U0 / r) * (principal + curved_terms) + O(|X|^{remainder_order - 1}).
struct LaplacianResult {
    XRPolynomial principal;
    XRPolynomial curved_terms;
    int remainder_order = INT_MAX;  // INT_MAX: the identity is exact

    /// A_{sigma l}: the coefficient table of principal + curved_terms.
    XRPolynomial total() const { return principal + curved_terms; }
};

LaplacianResult laplacian_monomial(const Monomial& mono, const GammaJet& jet, int k);
LaplacianResult laplacian_of_product(const XRPolynomial& P, const GammaJet& jet, int k);

/// Values for the free coefficients a_{mu 0}; unspecified ones default to 0.
using FreeCoefficients = std::map<Monomial, Rational>;

/// The degree-(k+1) polynomial whose system (A) coefficients match R up to
/// degree k. Throws SingularSystem if the triangular solve cannot reproduce R.
XRPolynomial solve_approximating(const GammaJet& jet, const XRPolynomial& R,
                                 const FreeCoefficients& free, int k);

double evaluate(const XRPolynomial& P, const Frame& frame);
double evaluate_u0p(const XRPolynomial& P, const Frame& frame);

}  // namespace slitkit
