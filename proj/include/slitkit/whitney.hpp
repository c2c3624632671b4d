#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "slitkit/geometry.hpp"
#include "slitkit/polynomial.hpp"

namespace slitkit {

/// rho(x) = p(2x) exp(-1 / (1 - 4|x|^2)) on B_{1/2}, with p of degree k + 2
/// chosen so that int rho = 1 and int rho x^mu = 0 for 1 <= |mu| <= k + 2.
struct Mollifier {
    int n = 1;
    int k = 0;
    std::vector<Monomial> basis;  // exponents of p (m = 0)
    std::vector<double> coeffs;
    double moment_error = 0.0;    // max deviation of the moment conditions

    double operator()(std::span<const double> x) const;
    /// int rho x^mu from the exact bump moments.
    double moment(const std::array<int, 2>& mu) const;
};

/// Throws SingularMoments if the Gram system cannot be solved to 1e-12.
Mollifier build_mollifier(int n, int k);

/// Fixed tensor quadrature of B_{1/2}: nodes z and weights w * rho(z).
struct MollifierRule {
    int n = 1;
    std::vector<std::array<double, 2>> nodes;
    std::vector<double> weights;
};
MollifierRule mollifier_rule(const Mollifier& rho);

/// (f * rho_scale)(x) = int f(x - scale z) rho(z) dz.
double mollify(const MollifierRule& rule, const std::function<double(std::span<const double>)>& f,
               std::span<const double> x, double scale);

/// A polynomial Q(y') in the tangential variables: m = 0 and mu_n = 0 in
/// every term. Throws std::invalid_argument otherwise or if deg Q > max_degree.
void validate_tangential(const XRPolynomial& Q, int max_degree);

/// Closest-point parameter s(x) of a point of R^n near Gamma (n = 2).
double tangential_coordinate(const SlitGeometry& geom, std::span<const double> x);

/// E(Q)(x) = int Q(y'(x - delta z)) rho(z) dz with delta = dist(x, Gamma);
/// E(Q) = Q(y'(x)) on Gamma. Throws OutOfChart if B_{delta/2}(x) leaves the
/// tube where the closest-point map is defined.
class WhitneyExtension {
public:
    WhitneyExtension(XRPolynomial Q, SlitGeometry geom, const Mollifier& rho);

    double operator()(std::span<const double> x) const;
    std::vector<double> operator()(const std::vector<std::array<double, 2>>& points) const;
    /// Q(y'(x)), the composition the extension must match on Gamma.
    double composed(std::span<const double> x) const;

    const XRPolynomial& Q() const { return Q_; }
    const SlitGeometry& geometry() const { return geom_; }

private:
    XRPolynomial Q_;
    SlitGeometry geom_;
    MollifierRule rule_;
    double reach_ = 0.0;
};

/// Jet match at (z1, g(z1)): for each order m <= max_order, the largest
/// |D^mu E(Q)(z + t nu) - D^mu (Q o y')(z)| over |mu| = m, for each t.
/// Row order -1 holds |d_nu E(Q)(z + t nu)|, which vanishes on Gamma.
struct JetDefectRow {
    int order = 0;
    std::vector<double> ts;
    std::vector<double> defects;
    double defect = 0.0;         // at the smallest t
    double approach_rate = 0.0;  // log-log slope of defect against t
};
std::vector<JetDefectRow> verify_jet_match(const WhitneyExtension& E, double z1, int max_order,
                                           const std::vector<double>& ts);

/// order,defect,approach_rate
void write_defect_csv(const std::vector<JetDefectRow>& rows, std::ostream& out);

}  // namespace slitkit
