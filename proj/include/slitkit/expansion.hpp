#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "slitkit/geometry.hpp"
#include "slitkit/polynomial.hpp"
#include "slitkit/solver.hpp"

namespace slitkit {

/// A scalar sample attached to the frame of its point.
struct Sample {
    Frame frame;
    double value = 0.0;
};

/// u/U0 at grid nodes with U0 > 0 and r >= core_radius(sol).
std::vector<Sample> quotient_samples(const GridSolution& sol);

/// u/U0 of a series solution on a polar grid of the disc of `radius`
/// (off the slit), `rings` radii by `rays` angles.
std::vector<Sample> quotient_samples(const HalfAngleSeries& series, double radius = 0.5, int rings = 200,
                                     int rays = 120);

struct FitOptions {
    double lambda0 = 0.25;      // outer radius of the fitting region
    double alpha = 0.5;         // Holder exponent used in the annulus weights
    double max_condition = 1e10;
    int min_annulus_samples = 8;
};

/// Weighted least-squares tangent polynomial of total degree `degree` in
/// (x - Z, r). Samples in B_{lambda0}(Z) are grouped into dyadic annuli; each
/// sample has weight U0^2, and each annulus is normalized to total weight
/// lambda_j^{-2(degree + alpha)} so small scales are not swamped.
/// Throws IllConditioned when the scaled normal matrix has condition > max_condition.
XRPolynomial fit_tangent(const std::vector<Sample>& samples, const std::array<double, 3>& Z, int degree,
                         const FitOptions& options = {});
XRPolynomial fit_tangent(const GridSolution& sol, const std::array<double, 3>& Z, int degree,
                         const FitOptions& options = {});
XRPolynomial fit_tangent(const HalfAngleSeries& series, int degree, const FitOptions& options = {});

/// Value of P at the sample point in coordinates (x - Z, r).
double evaluate_at(const XRPolynomial& P, const Frame& frame, const std::array<double, 3>& Z);

struct RateReport {
    std::vector<double> scales;       // strictly decreasing
    std::vector<double> errors;       // sup error on each dyadic shell
    std::vector<std::size_t> counts;  // samples per shell
    double exponent = 0.0;            // log-log least-squares slope
    double residual = 0.0;            // RMS of the log residuals
    double target = 0.0;
    bool exact = false;               // every error below 1e-13
    bool usable = true;               // residual <= 0.5

    bool passes(double margin = 0.2, double max_residual = 0.3) const;
    std::string summary() const;      // fitted_exponent,target,residual,pass
};

/// Builds a report from per-scale errors (no sampling). Throws
/// std::invalid_argument unless scales are strictly decreasing and >= 4.
RateReport make_rate_report(std::vector<double> scales, std::vector<double> errors,
                            std::vector<std::size_t> counts, double target);

/// e_j = max |value - P0| over samples with lambda_{j+1} < |X - Z| <= lambda_j
/// (lambda_j / 2 for the last scale). P0 is never refitted here.
/// Throws InsufficientResolution if the last shell has fewer than `min_samples` samples.
RateReport rate_report(const std::vector<Sample>& samples, const XRPolynomial& P0, const std::array<double, 3>& Z,
                       const std::vector<double>& scales, double target, std::size_t min_samples = 100);

/// P^i = trunc_{k+1}[P nu^i / 2 + r d_i P + d_r P d nu^i], i = 1..n, with k = jet.k.
std::vector<XRPolynomial> formal_gradient(const XRPolynomial& P0, const GammaJet& jet);

/// P^{ij} (row-major, n x n) with u_ij = (U0 / r^3) P^{ij} + ..., obtained by
/// differentiating (U0/r) P^i formally; truncated at degree k + 2.
std::vector<XRPolynomial> formal_hessian(const XRPolynomial& P0, const GammaJet& jet);

/// Scaled derivatives of a grid solution at nodes with U0 > 0:
/// grad[i] = (r/U0) d_i u and hess[i*n+j] = (r^3/U0) d_ij u.
struct DerivativeSample {
    Frame frame;
    std::array<double, 2> grad{};
    std::array<double, 4> hess{};
};
std::vector<DerivativeSample> scaled_derivatives(const GridSolution& sol);

/// grad[i] at every node as a nodal field, one vector per component. Sqrt grids
/// define it everywhere (a = 0 by extrapolation); uniform grids leave NaN
/// where U0 = 0 or a neighbour is missing.
std::vector<std::vector<double>> scaled_gradient_field(const GridSolution& sol);

/// Order 1 compares grad with formal_gradient, order 2 compares hess with
/// formal_hessian, over samples in the cone {r >= |x'|}.
RateReport derivative_rate_checks(const GridSolution& sol, const XRPolynomial& P0, const GammaJet& jet,
                                  const std::array<double, 3>& Z, const std::vector<double>& scales, int order,
                                  double target, std::size_t min_samples = 100);

/// scale,sup_error rows followed by the summary line.
void write_rate_csv(const RateReport& report, std::ostream& out);
/// Log-log plot of the errors with the fitted line.
void write_rate_svg(const RateReport& report, std::ostream& out, const std::string& title);

}  // namespace slitkit
