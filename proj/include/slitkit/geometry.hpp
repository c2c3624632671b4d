#pragma once

#include <array>
#include <span>

#include "slitkit/polynomial.hpp"

namespace slitkit {

/// The edge Gamma = graph(g) in R^n and the slit below it in R^{n+1}.
/// For n = 1 the graph degenerates to the single tip point at the origin.
struct SlitGeometry {
    int n = 1;
    Polynomial1D g;             // graph function of x_1 (n = 2 only)
    int k = 0;                  // regularity order; deg g <= k + 2
    double domain_radius = 1.0;
    double norm_bound = 0.0;    // sup of |g^{(j)}|, j >= 2, over [-1, 1]

    static SlitGeometry flat(int n, double domain_radius = 1.0, int k = 0);
    /// Validating constructor for n = 2. A negative k selects max(0, deg g - 2).
    static SlitGeometry graph(Polynomial1D g, double domain_radius = 1.0, int k = -1);

    bool is_flat() const { return g.is_zero(); }
    /// Throws InvalidGeometry when an invariant is violated.
    void validate() const;
    /// g(lambda x)/lambda: the blow-up used to normalize large graphs.
    SlitGeometry dilated(const Rational& lambda) const;

    double g_at(double t) const { return g.derivative_value(t, 0); }
    double dg_at(double t) const { return g.derivative_value(t, 1); }
    double ddg_at(double t) const { return g.derivative_value(t, 2); }
};

/// sup over [-1,1] of |g^{(j)}| for 2 <= j <= deg g.
double graph_norm(const Polynomial1D& g);

struct Frame {
    int n = 1;
    std::array<double, 3> X{};  // the query point (x, x_{n+1})
    double d = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double u0 = 0.0;
    std::array<double, 2> nu{};
    double kappa = 0.0;
    std::array<double, 2> z{};  // closest point on Gamma (in R^n)
    double s = 0.0;             // tangential parameter z_1 (n = 2)

    double y() const { return X[n]; }
};

/// Singular coordinates of X (length n + 1) relative to Gamma.
Frame closest_point_frame(const SlitGeometry& geom, std::span<const double> X);

/// Frame of the point with closest-point parameter s, signed distance d and
/// vertical coordinate y. No Newton solve is needed; valid inside the tube.
Frame frame_from_coordinates(const SlitGeometry& geom, double s, double d, double y);

/// Exact Taylor jets at the point (z1, g(z1)) of Gamma in the shifted
/// variables x - z. d and the tangent map are exact to degree order + 1, nu to
/// degree order + 1 as well; kappa is truncated at min(order, k).
struct GammaJet {
    int n = 1;
    Rational center = 0;
    int order = 0;
    int k = 0;
    bool flat = true;
    XRPolynomial d;
    std::array<XRPolynomial, 2> nu{XRPolynomial(1), XRPolynomial(1)};
    XRPolynomial kappa;
    XRPolynomial tangent;  // closest-point parameter y_1(x) - z1 (n = 2)

    /// Jet of the flat geometry, exact at every order.
    static GammaJet flat_jet(int n, int k);
};

GammaJet gamma_jet(const SlitGeometry& geom, const Rational& z1, int order);

}  // namespace slitkit
