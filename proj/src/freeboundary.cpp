#include "slitkit/freeboundary.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "slitkit/errors.hpp"

namespace slitkit {
namespace {

void check_gamma(double gamma) {
    if (!(gamma > -1.0 && gamma < 1.0)) throw std::invalid_argument("tip location must lie in (-1, 1)");
}

// disc of radius 1 about (-gamma, 0) in tip-centred coordinates
GridSpec disc_grid(double gamma, double h) {
    GridSpec g;
    g.h = h;
    g.radius = 1.0;
    g.center = -gamma;
    g.splitting = true;
    return g;
}

FieldSpec disc_data(const AngleFunction& phi, double gamma) {
    return FieldSpec{"phi", [phi, gamma](const Frame& f) { return phi(std::atan2(f.X[1], f.X[0] + gamma)); }};
}

}  // namespace

double mobius_factor(double gamma) {
    check_gamma(gamma);
    return 1.0 / std::sqrt(1.0 - gamma * gamma);
}

AngleFunction pull_back(const AngleFunction& phi, double gamma) {
    check_gamma(gamma);
    return [phi, gamma](double angle) {
        const std::complex<double> w = std::polar(1.0, angle);
        const std::complex<double> z = (w + gamma) / (1.0 + gamma * w);
        return phi(std::arg(z));
    };
}

TipSolution tip_solution(double gamma, const AngleFunction& phi, int terms) {
    TipSolution out;
    out.gamma = gamma;
    out.factor = mobius_factor(gamma);
    out.series = solve_series_2d(pull_back(phi, gamma), terms);
    out.a = out.series.leading() * out.factor;
    return out;
}

double tip_coefficient(double gamma, const AngleFunction& phi, int terms) {
    return tip_solution(gamma, phi, terms).a;
}

double fd_tip_coefficient(double gamma, const AngleFunction& phi, double h) {
    check_gamma(gamma);
    const auto geom = SlitGeometry::flat(1, 2.0 + std::abs(gamma));
    const GridSolution sol = solve_fd(geom, disc_data(phi, gamma), FieldSpec{}, disc_grid(gamma, h));
    std::vector<std::array<double, 6>> rows;
    std::vector<double> rhs;
    for (std::size_t idx = 0; idx < sol.size(); ++idx) {
        if (sol.kind[idx] != NodeKind::Unknown) continue;
        const Frame f = sol.node_frame(idx);
        if (f.u0 <= 0.0 || f.r < 8 * h || f.r > 0.125) continue;
        const double x = f.X[0], r = f.r;
        rows.push_back({1.0, x, r, x * x, x * r, r * r});
        rhs.push_back(sol.values[idx] / f.u0);
    }
    Eigen::MatrixXd A(rows.size(), 6);
    Eigen::VectorXd b(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < 6; ++j) A(i, j) = rows[i][j];
        b(i) = rhs[i];
    }
    return A.colPivHouseholderQr().solve(b)(0);
}

FreeBoundaryResult solve_free_boundary(const TipProblem& problem) {
    if (!problem.phi || !problem.G) throw std::invalid_argument("phi and G are required");
    if (!(problem.lo < problem.hi)) throw std::invalid_argument("bracket must satisfy lo < hi");
    check_gamma(problem.lo);
    check_gamma(problem.hi);
    if (problem.scan_points < 2) throw std::invalid_argument("scan needs at least two points");

    constexpr double kTol = 1e-9;
    FreeBoundaryResult res;
    auto F = [&](double gamma) {
        const double G = problem.G(gamma);
        if (!(G > 0.0)) throw std::invalid_argument("G must be positive on the bracket");
        return tip_coefficient(gamma, problem.phi, problem.terms) - G;
    };

    const int N = problem.scan_points;
    for (int i = 0; i < N; ++i) {
        const double g = problem.lo + (problem.hi - problem.lo) * i / (N - 1);
        res.scan.emplace_back(g, F(g));
    }

    auto refine = [&](double a, double fa, double b, double fb) {
        while (b - a > 1e-3) {
            const double m = 0.5 * (a + b);
            const double fm = F(m);
            ++res.iterations;
            if (fm == 0.0) return m;
            if ((fm < 0) == (fa < 0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
        // secant kept inside the bracket, bisection when it would leave
        for (int it = 0; it < 200; ++it) {
            double x = b - fb * (b - a) / (fb - fa);
            if (!(x > a && x < b)) x = 0.5 * (a + b);
            const double fx = F(x);
            ++res.iterations;
            if (std::abs(fx) < kTol) return x;
            if ((fx < 0) == (fa < 0)) {
                a = x;
                fa = fx;
            } else {
                b = x;
                fb = fx;
            }
        }
        throw NonConvergence("secant iteration did not reach |a - G| < 1e-9");
    };

    for (int i = 0; i < N; ++i) {
        const auto [g, f] = res.scan[i];
        if (std::abs(f) < kTol) {
            res.roots.push_back(g);
            continue;
        }
        if (i + 1 < N) {
            const auto [g2, f2] = res.scan[i + 1];
            if (std::abs(f2) >= kTol && (f < 0) != (f2 < 0)) res.roots.push_back(refine(g, f, g2, f2));
        }
    }
    if (res.roots.empty()) throw NoBracket("a(gamma) - G(gamma) has no sign change on the bracket");
    res.multiple_roots = res.roots.size() > 1;
    res.gamma = res.roots.front();
    const TipSolution tip = tip_solution(res.gamma, problem.phi, problem.terms);
    res.a = tip.a;
    res.residual = tip.a - problem.G(res.gamma);
    res.expansion = tip.series.c;
    return res;
}

void write_free_boundary_csv(const FreeBoundaryResult& result, std::ostream& out) {
    out << std::setprecision(17);
    out << "gamma,a,residual,multiple_roots\n";
    out << result.gamma << ',' << result.a << ',' << result.residual << ',' << (result.multiple_roots ? 1 : 0) << '\n';
    out << "root\n";
    for (double r : result.roots) out << r << '\n';
    out << "q,coefficient\n";
    for (std::size_t j = 0; j < result.expansion.size(); ++j)
        out << HalfAngleSeries::q(static_cast<int>(j)) << ',' << result.expansion[j] << '\n';
}

CriticalityReport energy_criticality(const AngleFunction& phi, double gamma, double dg, double h) {
    auto energy = [&](double g) {
        check_gamma(g);
        const auto geom = SlitGeometry::flat(1, 2.0 + std::abs(g));
        const GridSolution sol = solve_fd(geom, disc_data(phi, g), FieldSpec{}, disc_grid(g, h));
        return compute_energy(sol, 1.0 + std::abs(g)).total();
    };
    return {energy(gamma - dg), energy(gamma), energy(gamma + dg)};
}

}  // namespace slitkit
