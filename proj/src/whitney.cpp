#include "slitkit/whitney.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "slitkit/errors.hpp"

namespace slitkit {
namespace {

double bump_t(double t2) { return t2 < 1.0 ? std::exp(-1.0 / (1.0 - t2)) : 0.0; }

// R_j = int_0^1 exp(-1/(1 - rho^2)) rho^j d rho, tabulated once
double radial_moment(int j) {
    constexpr int kMax = 32;
    static const std::vector<double> table = [] {
        using boost::math::quadrature::gauss_kronrod;
        std::vector<double> t(kMax + 1);
        for (int i = 0; i <= kMax; ++i) {
            auto f = [i](double rho) { return bump_t(rho * rho) * std::pow(rho, i); };
            t[i] = gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-15);
        }
        return t;
    }();
    if (j < 0 || j > kMax) throw OrderTooHigh("bump moment of degree " + std::to_string(j));
    return table[j];
}

// int over the unit circle of cos^a sin^b
double angular_moment(int a, int b) {
    if (a % 2 || b % 2) return 0.0;
    using boost::math::tgamma;
    return 2.0 * tgamma((a + 1) / 2.0) * tgamma((b + 1) / 2.0) / tgamma((a + b + 2) / 2.0);
}

// N_alpha = int beta(x) (2x)^alpha dx over B_{1/2} in R^n
double bump_moment(int n, const std::array<int, 2>& alpha) {
    if (n == 1) {
        if (alpha[0] % 2) return 0.0;
        return radial_moment(alpha[0]);  // (1/2) * 2 * int_0^1
    }
    const double ang = angular_moment(alpha[0], alpha[1]);
    if (ang == 0.0) return 0.0;
    return 0.25 * radial_moment(alpha[0] + alpha[1] + 1) * ang;
}

double power_product(const std::array<int, 2>& mu, std::span<const double> t) {
    double v = 1.0;
    for (std::size_t i = 0; i < t.size(); ++i) v *= std::pow(t[i], mu[i]);
    return v;
}

// Composite Gauss-Legendre on [0, 1/2]: panels x 20 nodes.
template <class Fn>
void radial_nodes(int panels, Fn&& fn) {
    using G = boost::math::quadrature::gauss<double, 20>;
    const auto& abs = G::abscissa();
    const auto& wts = G::weights();
    const double width = 0.5 / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * width;
        for (std::size_t i = 0; i < abs.size(); ++i) {
            fn(mid + 0.5 * width * abs[i], 0.5 * width * wts[i]);
            if (abs[i] != 0.0) fn(mid - 0.5 * width * abs[i], 0.5 * width * wts[i]);
        }
    }
}

double loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > 0.0)) continue;
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt < 2) return std::numeric_limits<double>::infinity();
    return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

// Second-order central stencil for the m-th derivative, offsets -2..2.
std::array<double, 5> central_stencil(int m) {
    switch (m) {
        case 0: return {0, 0, 1, 0, 0};
        case 1: return {0, -0.5, 0, 0.5, 0};
        case 2: return {0, 1, -2, 1, 0};
        case 3: return {-0.5, 1, 0, -1, 0.5};
        case 4: return {1, -4, 6, -4, 1};
        default: throw OrderTooHigh("finite-difference derivatives are available up to order 4");
    }
}

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

}  // namespace

double Mollifier::operator()(std::span<const double> x) const {
    double t2 = 0.0;
    std::array<double, 2> t{};
    for (int i = 0; i < n; ++i) {
        t[i] = 2.0 * x[i];
        t2 += t[i] * t[i];
    }
    if (t2 >= 1.0) return 0.0;
    double p = 0.0;
    for (std::size_t b = 0; b < basis.size(); ++b) p += coeffs[b] * power_product(basis[b].mu, {t.data(), std::size_t(n)});
    return p * bump_t(t2);
}

double Mollifier::moment(const std::array<int, 2>& mu) const {
    double total = 0.0;
    for (std::size_t b = 0; b < basis.size(); ++b)
        total += coeffs[b] * bump_moment(n, {mu[0] + basis[b].mu[0], mu[1] + basis[b].mu[1]});
    return total * std::pow(0.5, mu[0] + mu[1]);
}

Mollifier build_mollifier(int n, int k) {
    if (n != 1 && n != 2) throw std::invalid_argument("mollifier dimension must be 1 or 2");
    if (k < 0) throw std::invalid_argument("k must be non-negative");
    Mollifier rho;
    rho.n = n;
    rho.k = k;
    for_each_monomial(n, k + 2, false, [&](const Monomial& m) { rho.basis.push_back(m); });
    const int N = static_cast<int>(rho.basis.size());

    using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    Mat G(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            G(i, j) = bump_moment(n, {rho.basis[i].mu[0] + rho.basis[j].mu[0], rho.basis[i].mu[1] + rho.basis[j].mu[1]});
    Vec rhs = Vec::Zero(N);
    rhs(0) = 1.0L;
    Eigen::FullPivLU<Mat> lu(G);
    if (!lu.isInvertible()) throw SingularMoments("Gram matrix is singular");
    const Vec c = lu.solve(rhs);
    rho.coeffs.resize(N);
    for (int i = 0; i < N; ++i) rho.coeffs[i] = static_cast<double>(c(i));

    double worst = 0.0;
    for (const auto& m : rho.basis) {
        const double target = m.x_degree() == 0 ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(rho.moment(m.mu) - target));
    }
    rho.moment_error = worst;
    if (!(worst <= 1e-12)) throw SingularMoments("moment conditions met only to " + std::to_string(worst));
    return rho;
}

MollifierRule mollifier_rule(const Mollifier& rho) {
    MollifierRule rule;
    rule.n = rho.n;
    constexpr int kPanels = 6;
    if (rho.n == 1) {
        radial_nodes(kPanels, [&](double x, double w) {
            for (double sgn : {1.0, -1.0}) {
                const double z = sgn * x;
                rule.nodes.push_back({z, 0.0});
                rule.weights.push_back(w * rho(std::span<const double>(&z, 1)));
            }
        });
        return rule;
    }
    constexpr int kAngles = 48;
    radial_nodes(kPanels, [&](double r, double w) {
        for (int a = 0; a < kAngles; ++a) {
            const double th = 2.0 * M_PI * (a + 0.5) / kAngles;
            const std::array<double, 2> z{r * std::cos(th), r * std::sin(th)};
            rule.nodes.push_back(z);
            rule.weights.push_back(w * r * (2.0 * M_PI / kAngles) * rho(z));
        }
    });
    return rule;
}

double mollify(const MollifierRule& rule, const std::function<double(std::span<const double>)>& f,
               std::span<const double> x, double scale) {
    double total = 0.0;
    std::array<double, 2> p{};
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        for (int i = 0; i < rule.n; ++i) p[i] = x[i] - scale * rule.nodes[q][i];
        total += rule.weights[q] * f(std::span<const double>(p.data(), rule.n));
    }
    return total;
}

void validate_tangential(const XRPolynomial& Q, int max_degree) {
    const int n = Q.dim();
    for (const auto& [m, c] : Q.terms()) {
        if (m.m != 0) throw std::invalid_argument("tangential polynomial contains r");
        if (m.mu[n - 1] != 0) throw std::invalid_argument("tangential polynomial depends on the normal variable");
    }
    if (Q.degree() > max_degree) throw std::invalid_argument("tangential polynomial degree exceeds k + 2");
}

double tangential_coordinate(const SlitGeometry& geom, std::span<const double> x) {
    if (geom.n != 2) throw std::invalid_argument("tangential coordinate needs n = 2");
    if (geom.is_flat()) return x[0];
    double s = x[0];
    for (int it = 0; it < 50; ++it) {
        const double g = geom.g_at(s), gp = geom.dg_at(s), gpp = geom.ddg_at(s);
        const double f = (s - x[0]) + gp * (g - x[1]);
        const double df = 1.0 + gpp * (g - x[1]) + gp * gp;
        const double step = f / df;
        s -= step;
        if (std::abs(step) < 1e-15) return s;
    }
    const std::array<double, 3> X{x[0], x[1], 0.0};
    return closest_point_frame(geom, X).s;
}

WhitneyExtension::WhitneyExtension(XRPolynomial Q, SlitGeometry geom, const Mollifier& rho)
    : Q_(std::move(Q)), geom_(std::move(geom)), rule_(mollifier_rule(rho)) {
    if (Q_.dim() != geom_.n || rho.n != geom_.n) throw std::invalid_argument("dimension mismatch");
    validate_tangential(Q_, rho.k + 2);
    reach_ = geom_.norm_bound > 0.0 ? 1.0 / geom_.norm_bound : std::numeric_limits<double>::infinity();
}

double WhitneyExtension::composed(std::span<const double> x) const {
    if (geom_.n == 1) return to_double(Q_.coeff(Monomial{}));
    const double s = tangential_coordinate(geom_, x);
    const std::array<double, 2> y{s, 0.0};
    return Q_.evaluate(y, 0.0);
}

double WhitneyExtension::operator()(std::span<const double> x) const {
    if (geom_.n == 1) return composed(x);
    const double delta = std::abs(x[1] - geom_.g_at(tangential_coordinate(geom_, x))) /
                         std::sqrt(1.0 + std::pow(geom_.dg_at(tangential_coordinate(geom_, x)), 2));
    const double norm = std::hypot(x[0], x[1]);
    if (norm + 0.5 * delta >= geom_.domain_radius || 1.5 * delta >= reach_)
        throw OutOfChart("mollification ball leaves the tube around Gamma");
    if (delta == 0.0) return composed(x);
    return mollify(rule_, [&](std::span<const double> p) { return composed(p); }, x, delta);
}

std::vector<double> WhitneyExtension::operator()(const std::vector<std::array<double, 2>>& points) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back((*this)(std::span<const double>(p.data(), geom_.n)));
    return out;
}

std::vector<JetDefectRow> verify_jet_match(const WhitneyExtension& E, double z1, int max_order,
                                           const std::vector<double>& ts) {
    const auto& geom = E.geometry();
    if (geom.n != 2) throw std::invalid_argument("jet match is defined for n = 2");
    if (ts.size() < 2) throw std::invalid_argument("need at least two approach distances");
    if (max_order > 4) throw OrderTooHigh("jet match available up to order 4");
    const double z2 = geom.g_at(z1);
    const double gp = geom.dg_at(z1);
    const double J = std::sqrt(1 + gp * gp);
    const std::array<double, 2> nu{-gp / J, 1 / J};

    // Taylor coefficients of Q o y' at z from the tangent-map jet.
    const Rational c1(z1);
    const int jet_order = std::min(geom.k + 1, std::max(0, max_order - 1));
    if (max_order > jet_order + 1) throw OrderTooHigh("geometry order too low for the requested jet");
    const GammaJet jet = gamma_jet(geom, c1, jet_order);
    XRPolynomial y1 = jet.tangent + XRPolynomial::constant(2, c1);
    XRPolynomial composed = XRPolynomial::constant(2, 0);
    XRPolynomial power = XRPolynomial::constant(2, 1);
    for (int j = 0; j <= E.Q().degree(); ++j) {
        composed += E.Q().coeff(Monomial{{j, 0}, 0}) * power;
        power = XRPolynomial::multiply_truncated(power, y1, max_order);
    }

    std::vector<JetDefectRow> rows;
    JetDefectRow normal{-1, ts, {}, 0.0, 0.0};
    for (double t : ts) {
        const double h = t / 8;
        const std::array<double, 2> p{z1 + (t + h) * nu[0], z2 + (t + h) * nu[1]};
        const std::array<double, 2> q{z1 + (t - h) * nu[0], z2 + (t - h) * nu[1]};
        normal.defects.push_back(std::abs(E(p) - E(q)) / (2 * h));
    }
    rows.push_back(normal);

    for (int m = 0; m <= max_order; ++m) {
        JetDefectRow row{m, ts, {}, 0.0, 0.0};
        for (double t : ts) {
            const double h = t / 8;
            const double x0 = z1 + t * nu[0], y0 = z2 + t * nu[1];
            double worst = 0.0;
            for (int a = m; a >= 0; --a) {
                const int b = m - a;
                const auto sa = central_stencil(a), sb = central_stencil(b);
                double val = 0.0;
                for (int i = 0; i < 5; ++i) {
                    if (sa[i] == 0.0) continue;
                    for (int j = 0; j < 5; ++j) {
                        if (sb[j] == 0.0) continue;
                        const std::array<double, 2> p{x0 + (i - 2) * h, y0 + (j - 2) * h};
                        val += sa[i] * sb[j] * E(p);
                    }
                }
                val /= std::pow(h, m);
                const double exact = to_double(composed.coeff(Monomial{{a, b}, 0})) * factorial(a) * factorial(b);
                worst = std::max(worst, std::abs(val - exact));
            }
            row.defects.push_back(worst);
        }
        rows.push_back(row);
    }
    for (auto& row : rows) {
        std::size_t last = 0;
        for (std::size_t i = 1; i < row.ts.size(); ++i)
            if (row.ts[i] < row.ts[last]) last = i;
        row.defect = row.defects[last];
        row.approach_rate = loglog_fit(row.ts, row.defects);
    }
    return rows;
}

void write_defect_csv(const std::vector<JetDefectRow>& rows, std::ostream& out) {
    out << "order,defect,approach_rate\n" << std::setprecision(17);
    for (const auto& row : rows) out << row.order << ',' << row.defect << ',' << row.approach_rate << '\n';
}

}  // namespace slitkit
