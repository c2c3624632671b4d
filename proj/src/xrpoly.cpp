#include "slitkit/xrpoly.hpp"

#include <stdexcept>

#include "slitkit/errors.hpp"

namespace slitkit {
namespace {

XRPolynomial flat_bracket(int n, const Monomial& mono) {
    XRPolynomial out(n);
    const int m = mono.m;
    const int mun = mono.mu[n - 1];
    if (m >= 1) out.add(Monomial{mono.mu, m - 1}, Rational(m * (m + 1 + 2 * mun)));
    if (mun > 0) {
        Monomial lowered = mono;
        --lowered.mu[n - 1];
        out.add(lowered, Rational(mun));
    }
    for (int i = 0; i < n; ++i) {
        if (mono.mu[i] < 2) continue;
        Monomial lowered = mono;
        lowered.mu[i] -= 2;
        lowered.m += 1;
        out.add(lowered, Rational(mono.mu[i] * (mono.mu[i] - 1)));
    }
    return out;
}

XRPolynomial r_power(int n, int m) { return XRPolynomial::monomial(n, Monomial{{0, 0}, m}); }

// Full bracket with the jets substituted, truncated at degree k:
//   sum mu_i(mu_i-1) x^{mu-2i} r^{m+1} + m(m+1) x^mu r^{m-1}
//   + (r^m/2 + m d r^{m-1}) (-kappa x^mu + 2 sum mu_i nu^i x^{mu-i})
XRPolynomial curved_bracket(int n, const Monomial& mono, const GammaJet& jet, int k) {
    const int m = mono.m;
    XRPolynomial out(n);
    for (int i = 0; i < n; ++i) {
        if (mono.mu[i] < 2) continue;
        Monomial lowered = mono;
        lowered.mu[i] -= 2;
        lowered.m += 1;
        out.add(lowered, Rational(mono.mu[i] * (mono.mu[i] - 1)));
    }
    if (m >= 1) out.add(Monomial{mono.mu, m - 1}, Rational(m * (m + 1)));

    const XRPolynomial xmu = XRPolynomial::monomial(n, Monomial{mono.mu, 0});
    XRPolynomial inner = -XRPolynomial::multiply_truncated(jet.kappa, xmu, k);
    for (int i = 0; i < n; ++i) {
        if (mono.mu[i] == 0) continue;
        Monomial lowered{mono.mu, 0};
        --lowered.mu[i];
        inner += XRPolynomial::multiply_truncated(
            jet.nu[i], XRPolynomial::monomial(n, lowered, Rational(2 * mono.mu[i])), k + 1);
    }
    XRPolynomial weight = Rational(1, 2) * r_power(n, m);
    if (m >= 1) weight += XRPolynomial::multiply_truncated(Rational(m) * jet.d, r_power(n, m - 1), k + 1);
    out += XRPolynomial::multiply_truncated(weight, inner, k);
    return out.truncated(k);
}

}  // namespace

LaplacianResult laplacian_monomial(const Monomial& mono, const GammaJet& jet, int k) {
    if (mono.m < 0) throw std::invalid_argument("laplacian_monomial needs m >= 0");
    const int n = jet.n;
    LaplacianResult result;
    result.principal = flat_bracket(n, mono).truncated(k);
    result.curved_terms = XRPolynomial(n);
    if (jet.flat) {
        result.remainder_order = INT_MAX;
        return result;
    }
    if (jet.order < k + 1) throw std::invalid_argument("jet order must be at least k + 1");
    result.curved_terms = curved_bracket(n, mono, jet, k) - result.principal;
    result.remainder_order = k + 1;
    return result;
}

LaplacianResult laplacian_of_product(const XRPolynomial& P, const GammaJet& jet, int k) {
    if (P.dim() != jet.n) throw std::invalid_argument("polynomial and jet dimensions differ");
    LaplacianResult result;
    result.principal = XRPolynomial(jet.n);
    result.curved_terms = XRPolynomial(jet.n);
    result.remainder_order = jet.flat ? INT_MAX : k + 1;
    for (const auto& [mono, c] : P.terms()) {
        const LaplacianResult part = laplacian_monomial(mono, jet, k);
        result.principal += c * part.principal;
        result.curved_terms += c * part.curved_terms;
    }
    return result;
}

XRPolynomial solve_approximating(const GammaJet& jet, const XRPolynomial& R,
                                 const FreeCoefficients& free, int k) {
    const int n = jet.n;
    if (R.dim() != n) throw std::invalid_argument("R has the wrong dimension");
    if (R.degree() > k) throw std::invalid_argument("deg R exceeds k");
    XRPolynomial P(n);
    for (const auto& [mono, value] : free) {
        if (mono.m != 0) throw std::invalid_argument("free coefficients must have m = 0");
        if (mono.degree() > k + 1) throw std::invalid_argument("free coefficient beyond degree k + 1");
        P.set(mono, value);
    }
    XRPolynomial A = laplacian_of_product(P, jet, k).total();

    // Equation (sigma, m-1) fixes a_{sigma m}: by degree, then by increasing m.
    for (int D = 1; D <= k + 1; ++D) {
        for (int m = 1; m <= D; ++m) {
            const int xdeg = D - m;
            for (int a = xdeg; a >= 0; --a) {
                if (n == 1 && a != xdeg) break;
                Monomial sigma = n == 1 ? Monomial{{xdeg, 0}, 0} : Monomial{{a, xdeg - a}, 0};
                const Monomial target{sigma.mu, m};
                const Monomial eq{sigma.mu, m - 1};
                const int diag = m * (m + 1 + 2 * sigma.mu[n - 1]);
                if (diag == 0) throw SingularSystem("zero pivot at degree " + std::to_string(D));
                const Rational value = (R.coeff(eq) - A.coeff(eq)) / diag;
                if (value == 0) continue;
                P.add(target, value);
                A += value * laplacian_monomial(target, jet, k).total();
            }
        }
    }
    const XRPolynomial check = laplacian_of_product(P, jet, k).total();
    if (check != R.truncated(k)) {
        throw SingularSystem("triangular solve left residual " + (check - R).to_string());
    }
    return P;
}

double evaluate(const XRPolynomial& P, const Frame& frame) {
    return P.evaluate(std::span<const double>(frame.X.data(), frame.n), frame.r);
}

double evaluate_u0p(const XRPolynomial& P, const Frame& frame) { return frame.u0 * evaluate(P, frame); }

}  // namespace slitkit
