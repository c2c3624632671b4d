#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "slitkit/solver.hpp"

namespace slitkit {

/// Boundary data as a function of the polar angle on the unit circle.
using AngleFunction = std::function<double(double)>;

/// |T'(gamma)|^{1/2} for T(z) = (z - gamma)/(1 - gamma z).
double mobius_factor(double gamma);

/// psi(phi) = phi(arg T^{-1}(e^{i phi})): the data seen from the moved tip.
AngleFunction pull_back(const AngleFunction& phi, double gamma);

/// Harmonic function in the unit disc slit along {x2 = 0, x1 <= gamma}.
struct TipSolution {
    double gamma = 0.0;
    double a = 0.0;             // du/dU0 at the tip
    double factor = 1.0;        // mobius_factor(gamma)
    HalfAngleSeries series;     // expansion of u o T^{-1} about 0
};

TipSolution tip_solution(double gamma, const AngleFunction& phi, int terms = 64);
double tip_coefficient(double gamma, const AngleFunction& phi, int terms = 64);

/// Brute-force oracle: uniform-grid solve in the unit disc centred at
/// -gamma relative to the tip, then a least-squares fit of u/U0 by
/// {1, x, r, x^2, x r, r^2} over 8h <= r <= 1/8.
double fd_tip_coefficient(double gamma, const AngleFunction& phi, double h);

struct TipProblem {
    AngleFunction phi;
    std::function<double(double)> G;
    double lo = -0.5;
    double hi = 0.5;
    int scan_points = 33;
    int terms = 64;
};

struct FreeBoundaryResult {
    double gamma = 0.0;
    double a = 0.0;
    double residual = 0.0;               // a(gamma) - G(gamma)
    std::vector<double> roots;           // every root found by the scan
    bool multiple_roots = false;
    std::vector<double> expansion;       // series coefficients of u o T^{-1} at gamma
    std::vector<std::pair<double, double>> scan;  // (gamma, a - G)
    int iterations = 0;
};

/// Scan, bisection to width 1e-3, then safeguarded secant to |a - G| < 1e-9.
/// Throws NoBracket without a sign change, std::invalid_argument if G <= 0
/// on the scan or the bracket leaves (-1, 1).
FreeBoundaryResult solve_free_boundary(const TipProblem& problem);

/// gamma,a,residual rows for every root, then the series coefficients.
void write_free_boundary_csv(const FreeBoundaryResult& result, std::ostream& out);

/// Energy of the disc solution for tips gamma - dg, gamma, gamma + dg.
struct CriticalityReport {
    double e_minus = 0.0, e_center = 0.0, e_plus = 0.0;
    /// E(gamma) <= E(gamma +- dg) + tolerance.
    bool one_sided(double tolerance) const {
        return e_center <= e_minus + tolerance && e_center <= e_plus + tolerance;
    }
};
CriticalityReport energy_criticality(const AngleFunction& phi, double gamma, double dg, double h);

}  // namespace slitkit
