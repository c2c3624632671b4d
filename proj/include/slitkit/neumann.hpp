#pragma once

#include <array>
#include <span>
#include <vector>

#include "slitkit/expansion.hpp"
#include "slitkit/geometry.hpp"
#include "slitkit/polynomial.hpp"
#include "slitkit/solver.hpp"
#include "slitkit/whitney.hpp"
#include "slitkit/xrpoly.hpp"

namespace slitkit {

/// B(V) with Delta((U0 / r) V) = (U0 / r^3) B(V), truncated at max_degree.
/// Per monomial:
///   B(x^mu r^m) = sum mu_i(mu_i-1) x^{mu-2i} r^{m+2} + (m-1) m x^mu r^m
///               + (r^{m+1}/2 + (m-1) d r^m)(-kappa x^mu + 2 sum mu_i nu^i x^{mu-i}).
XRPolynomial laplacian_of_quotient(const XRPolynomial& V, const GammaJet& jet, int max_degree);

/// Flat Neumann polynomial T = Q(x') + r P of degree <= k + 2 with
/// Delta((U0/(2r)) T) = 0 and T_nu = 0 on Gamma. `free` holds the
/// coefficients b_{mu,1} with mu_n != 0 (key Monomial{mu, 1}); the others
/// default to 0. Throws std::invalid_argument on an invalid Q or key.
XRPolynomial constant_T(int n, int k, const XRPolynomial& Q, const FreeCoefficients& free = {});

/// (T(z + t e_n, r = t) - T(z, 0)) / t for z on the flat Gamma.
double normal_difference(const XRPolynomial& T, std::span<const double> z, double t);

/// Pair (Q, P) for u_n = (U0/r) P_n0: W = Q(y'(x)) + (r / P_n0) P, i.e.
/// u_n W = (U0 / r) V with V = P_n0 (Q o y') + r P.
struct NeumannPair {
    int n = 1;
    int k = 0;
    XRPolynomial Q;         // tangential, absolute y' coordinates
    XRPolynomial P;         // degree <= k + 1 in (x - Z, r)
    XRPolynomial P_n0;
    XRPolynomial V;
    XRPolynomial residual;  // r^0 and r^1 coefficients of trunc_{k+2} B(V)
};

/// Solves the boundary system (P(., 0) restricted to Gamma cancels
/// P_n0 d_nu Q up to degree k + 1) and the interior system (coefficients
/// x^sigma r^{l+1}, l >= 1, of B(V) vanish up to degree k + 2). `free` holds
/// a_{mu,0} with mu_n != 0. Throws SingularSystem when P_n0 vanishes at Z.
NeumannPair solve_pair_systems(const GammaJet& jet, const XRPolynomial& P_n0, const XRPolynomial& Q,
                               const FreeCoefficients& free, int k);

struct TracePoint {
    double s = 0.0;                 // closest-point parameter (0 for n = 1)
    std::array<double, 2> z{};
    double trace = 0.0;             // w on Gamma
    double normal_derivative = 0.0; // w_nu on Gamma
};

/// w = u_i / u_n (0-based i) from the scaled gradient of a grid solution.
struct QuotientField {
    int component = 0;
    std::vector<Sample> samples;    // nodes with U0 > 0, r >= core, |X| <= radius
    std::vector<TracePoint> trace;  // quadratic extrapolation along nu
};

/// Throws DegenerateWeight if u_n <= 0 at a sampled node. The trace uses the
/// values at distances t = 4, 16, 64 h_a^2 (sqrt grids) or 2, 4, 8 h
/// (uniform grids) along nu.
QuotientField quotient(const GridSolution& u, int i, double radius = 0.5);

/// max |trace - nu_i / nu_n| over |s| <= s_max and the scale max |nu_i / nu_n|.
struct TraceCheck {
    double max_error = 0.0;
    double scale = 0.0;
    std::size_t points = 0;
    double relative() const { return scale > 0.0 ? max_error / scale : max_error; }
};
TraceCheck check_trace(const QuotientField& w, const SlitGeometry& geom, double s_max = 0.25);

/// Degree k + 2 tangent of w at Z and its decay report (target k + 2 + alpha).
struct NeumannRate {
    XRPolynomial tangent;
    RateReport report;
};
NeumannRate neumann_rate(const QuotientField& w, const std::array<double, 3>& Z, int k,
                         const std::vector<double>& scales, double alpha = 0.5, std::size_t min_samples = 100);

/// W = Q~ + (r / G_n) P on a sqrt grid, with Q~ = E(Q) when a mollifier is
/// given and Q o y' otherwise. `boundary` measures |W_nu| on Gamma through
/// W_nu = d_nu Q~ + P(z, 0) / G_n (target k + 1 + alpha); `interior` measures
/// (r / U0) |Delta_h(u_n W)| in the cone r >= |x' - Z'| (target k + alpha).
struct WQPReport {
    std::vector<double> W;
    RateReport boundary;
    RateReport interior;
};
WQPReport build_WQP(const NeumannPair& pair, const GridSolution& u, const std::array<double, 3>& Z,
                    const std::vector<double>& scales, const Mollifier* rho = nullptr, double alpha = 0.5);

}  // namespace slitkit
