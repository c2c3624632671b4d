#include "slitkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slitkit/errors.hpp"

namespace slitkit {
namespace {

constexpr int kNewtonIterations = 50;
constexpr double kNewtonTolerance = 1e-12;

// q(S(xi)) truncated at degree N; S must have no constant term.
XRPolynomial compose(const Polynomial1D& q, const XRPolynomial& S, int N) {
    XRPolynomial acc(S.dim());
    const auto& c = q.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = XRPolynomial::multiply_truncated(acc, S, N);
        acc += XRPolynomial::constant(S.dim(), *it);
    }
    return acc;
}

// (1 + u)^e truncated at degree N for u without constant term.
XRPolynomial binomial_series(const XRPolynomial& u, const Rational& e, int N) {
    XRPolynomial acc = XRPolynomial::constant(u.dim(), 1);
    XRPolynomial power = acc;
    Rational coeff = 1;
    for (int j = 1; j <= N; ++j) {
        power = XRPolynomial::multiply_truncated(power, u, N);
        if (power.is_zero()) break;
        coeff *= (e - (j - 1));
        coeff /= j;
        acc += coeff * power;
    }
    return acc;
}

void fill_angles(Frame& f) {
    const double y = f.y();
    f.r = std::hypot(f.d, y);
    if (y == 0.0 && f.d < 0.0) {
        f.theta = M_PI;
        f.u0 = 0.0;
        return;
    }
    f.theta = std::atan2(y, f.d);
    if (f.d >= 0.0) f.u0 = std::sqrt(0.5 * (f.d + f.r));
    else f.u0 = std::abs(y) / std::sqrt(2.0 * (f.r - f.d));
}

}  // namespace

SlitGeometry SlitGeometry::flat(int n, double domain_radius, int k) {
    SlitGeometry geom;
    geom.n = n;
    geom.k = k;
    geom.domain_radius = domain_radius;
    geom.validate();
    return geom;
}

SlitGeometry SlitGeometry::graph(Polynomial1D g, double domain_radius, int k) {
    SlitGeometry geom;
    geom.n = 2;
    geom.k = k >= 0 ? k : std::max(0, g.degree() - 2);
    geom.domain_radius = domain_radius;
    geom.norm_bound = graph_norm(g);
    geom.g = std::move(g);
    geom.validate();
    return geom;
}

double graph_norm(const Polynomial1D& g) {
    double best = 0.0;
    for (int j = 2; j <= g.degree(); ++j) {
        // |g^{(j)}| on [-1, 1] bounded by the sum of absolute derivative coefficients
        double bound = 0.0;
        Polynomial1D dj = g;
        for (int q = 0; q < j; ++q) dj = dj.derivative();
        for (const auto& c : dj.coeffs()) bound += std::abs(to_double(c));
        best = std::max(best, bound);
    }
    return best;
}

void SlitGeometry::validate() const {
    if (n != 1 && n != 2) throw InvalidGeometry("dimension must be 1 or 2, got " + std::to_string(n));
    if (!(domain_radius > 0.0)) throw InvalidGeometry("domain_radius must be positive");
    if (k < 0) throw InvalidGeometry("regularity order k must be nonnegative");
    if (n == 1 && !g.is_zero()) throw InvalidGeometry("for n = 1 the graph must be identically zero");
    if (!g.is_zero()) {
        const auto& c = g.coeffs();
        if (c[0] != 0) throw InvalidGeometry("g(0) must vanish");
        if (c.size() > 1 && c[1] != 0) throw InvalidGeometry("g'(0) must vanish");
        if (g.degree() > k + 2)
            throw InvalidGeometry("deg g = " + std::to_string(g.degree()) + " exceeds k + 2");
    }
    if (norm_bound > 1.0)
        throw InvalidGeometry("norm bound " + std::to_string(norm_bound) + " exceeds 1; dilate first");
}

SlitGeometry SlitGeometry::dilated(const Rational& lambda) const {
    if (lambda <= 0) throw InvalidGeometry("dilation factor must be positive");
    if (n == 1) return *this;
    std::vector<Rational> c = g.coeffs();
    Rational scale = 1 / lambda;
    for (auto& coeff : c) {
        coeff *= scale;
        scale *= lambda;
    }
    SlitGeometry out = *this;
    out.g = Polynomial1D(std::move(c));
    out.norm_bound = graph_norm(out.g);
    out.validate();
    return out;
}

Frame frame_from_coordinates(const SlitGeometry& geom, double s, double d, double y) {
    Frame f;
    f.n = geom.n;
    f.d = d;
    if (geom.n == 1) {
        f.X = {d, y, 0.0};
        f.nu = {1.0, 0.0};
        f.kappa = 0.0;
    } else {
        const double gp = geom.dg_at(s);
        const double J = std::sqrt(1.0 + gp * gp);
        const double curv = geom.ddg_at(s) / (J * J * J);
        f.s = s;
        f.z = {s, geom.g_at(s)};
        f.nu = {-gp / J, 1.0 / J};
        f.X = {s + d * f.nu[0], f.z[1] + d * f.nu[1], y};
        f.kappa = curv / (1.0 - curv * d);
    }
    fill_angles(f);
    return f;
}

Frame closest_point_frame(const SlitGeometry& geom, std::span<const double> X) {
    const int n = geom.n;
    if (static_cast<int>(X.size()) != n + 1)
        throw std::invalid_argument("point must have n + 1 coordinates");
    double norm2 = 0.0;
    for (double v : X) norm2 += v * v;
    if (std::sqrt(norm2) >= geom.domain_radius) throw OutOfDomain("|X| >= domain_radius");

    if (n == 1 || geom.is_flat()) {
        Frame f;
        f.n = n;
        for (int i = 0; i <= n; ++i) f.X[i] = X[i];
        f.d = X[n - 1];
        f.nu[n - 1] = 1.0;
        if (n == 2) {
            f.z = {X[0], 0.0};
            f.s = X[0];
        }
        fill_angles(f);
        return f;
    }

    const double x1 = X[0];
    const double x2 = X[1];
    auto dist2 = [&](double t) {
        const double a = t - x1;
        const double b = geom.g_at(t) - x2;
        return a * a + b * b;
    };
    // Coarse seed: the closest point lies within the vertical distance of x1.
    const double rho = std::abs(x2 - geom.g_at(x1));
    double t = x1;
    if (rho > 0.0) {
        constexpr int kSeeds = 64;
        double best = dist2(t);
        for (int j = 0; j <= kSeeds; ++j) {
            const double cand = x1 - rho + 2.0 * rho * j / kSeeds;
            const double val = dist2(cand);
            if (val < best) {
                best = val;
                t = cand;
            }
        }
    }
    bool converged = false;
    for (int it = 0; it < kNewtonIterations; ++it) {
        const double gp = geom.dg_at(t);
        const double gv = geom.g_at(t) - x2;
        const double F = (t - x1) + gv * gp;
        if (std::abs(F) < kNewtonTolerance) {
            converged = true;
            break;
        }
        const double dF = 1.0 + gp * gp + gv * geom.ddg_at(t);
        double step = dF > 0.0 ? -F / dF : -F;
        const double current = dist2(t);
        int halvings = 0;
        while (dist2(t + step) > current * (1.0 + 1e-12) + 1e-300 && halvings < 40) {
            step *= 0.5;
            ++halvings;
        }
        t += step;
    }
    if (!converged) {
        const double gp = geom.dg_at(t);
        converged = std::abs((t - x1) + (geom.g_at(t) - x2) * gp) < kNewtonTolerance;
    }
    if (!converged) throw NonConvergence("closest point Newton iteration did not converge");

    const double gp = geom.dg_at(t);
    const double J = std::sqrt(1.0 + gp * gp);
    const double d = ((x2 - geom.g_at(t)) - gp * (x1 - t)) / J;  // projection on (-g', 1)/J
    Frame f = frame_from_coordinates(geom, t, d, X[2]);
    for (int i = 0; i <= n; ++i) f.X[i] = X[i];
    return f;
}

GammaJet GammaJet::flat_jet(int n, int k) {
    GammaJet jet;
    jet.n = n;
    jet.k = k;
    jet.order = std::numeric_limits<int>::max();
    jet.flat = true;
    jet.d = XRPolynomial::x(n, n - 1);
    jet.nu = {XRPolynomial(n), XRPolynomial(n)};
    jet.nu[n - 1] = XRPolynomial::constant(n, 1);
    jet.kappa = XRPolynomial(n);
    jet.tangent = n == 2 ? XRPolynomial::x(2, 0) : XRPolynomial(1);
    return jet;
}

GammaJet gamma_jet(const SlitGeometry& geom, const Rational& z1, int order) {
    if (order < 0) throw OrderTooHigh("jet order must be nonnegative");
    if (order > geom.k + 1)
        throw OrderTooHigh("order " + std::to_string(order) + " exceeds k + 1 = " +
                           std::to_string(geom.k + 1));
    if (geom.n == 1 || geom.is_flat()) {
        if (geom.n == 1 && z1 != 0) throw InvalidGeometry("for n = 1 Gamma is the origin");
        GammaJet jet = GammaJet::flat_jet(geom.n, geom.k);
        jet.order = order;
        jet.center = z1;
        return jet;
    }
    const Polynomial1D shifted = geom.g.shifted(z1);
    const auto& sc = shifted.coeffs();
    if (sc.size() > 1 && sc[1] != 0)
        throw NotNormalized("jets are computed only where the tangent of Gamma is horizontal");

    std::vector<Rational> Gc = sc;
    if (!Gc.empty()) Gc[0] = 0;
    const Polynomial1D G(Gc);
    const Polynomial1D Gp = G.derivative();

    const int N = order + 2;
    const XRPolynomial xi1 = XRPolynomial::x(2, 0);
    const XRPolynomial xi2 = XRPolynomial::x(2, 1);
    XRPolynomial s = xi1;
    XRPolynomial d = xi2;
    // x = (z1 + s, g(z1 + s)) + d nu(s); each sweep fixes one more degree.
    for (int it = 0; it <= N + 1; ++it) {
        const XRPolynomial gp = compose(Gp, s, N);
        const XRPolynomial u = XRPolynomial::multiply_truncated(gp, gp, N);
        const XRPolynomial W = binomial_series(u, Rational(-1, 2), N);
        const XRPolynomial invW = binomial_series(u, Rational(1, 2), N);
        const XRPolynomial A = XRPolynomial::multiply_truncated(gp, W, N);
        XRPolynomial s_next = xi1 + XRPolynomial::multiply_truncated(d, A, N);
        XRPolynomial d_next = XRPolynomial::multiply_truncated(xi2 - compose(G, s, N), invW, N);
        const bool fixed = s_next == s && d_next == d;
        s = std::move(s_next);
        d = std::move(d_next);
        if (fixed) break;
    }

    GammaJet jet;
    jet.n = 2;
    jet.center = z1;
    jet.order = order;
    jet.k = geom.k;
    jet.flat = false;
    jet.d = d;
    jet.nu = {d.dx(0), d.dx(1)};
    jet.kappa = (-(d.dx(0).dx(0) + d.dx(1).dx(1))).truncated(std::min(order, geom.k));
    jet.tangent = s;
    return jet;
}

}  // namespace slitkit
