#include "slitkit/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "slitkit/errors.hpp"

namespace slitkit {

namespace {

double distance_to(const Frame& f, const std::array<double, 3>& Z) {
    double s = 0.0;
    for (int a = 0; a <= f.n; ++a) s += (f.X[a] - Z[a]) * (f.X[a] - Z[a]);
    return std::sqrt(s);
}

std::vector<Monomial> monomials(int n, int degree) {
    std::vector<Monomial> out;
    for_each_monomial(n, degree, true, [&](const Monomial& m) { out.push_back(m); });
    return out;
}

double monomial_value(const Monomial& m, const std::array<double, 2>& x, int n, double r) {
    double v = std::pow(r, m.m);
    for (int i = 0; i < n; ++i) v *= std::pow(x[i], m.mu[i]);
    return v;
}

}  // namespace

double evaluate_at(const XRPolynomial& P, const Frame& frame, const std::array<double, 3>& Z) {
    std::array<double, 2> x{};
    for (int i = 0; i < frame.n; ++i) x[i] = frame.X[i] - Z[i];
    return P.evaluate(std::span<const double>(x.data(), frame.n), frame.r);
}

std::vector<Sample> quotient_samples(const GridSolution& sol) {
    std::vector<Sample> out;
    const double core = core_radius(sol);
    for (std::size_t i = 0; i < sol.size(); ++i) {
        if (sol.kind[i] != NodeKind::Unknown) continue;
        const Frame f = sol.node_frame(i);
        if (f.u0 <= 0.0 || f.r < core) continue;
        out.push_back({f, sol.values[i] / f.u0});
    }
    return out;
}

std::vector<Sample> quotient_samples(const HalfAngleSeries& series, double radius, int rings, int rays) {
    std::vector<Sample> out;
    const auto geom = SlitGeometry::flat(1);
    for (int i = 1; i <= rings; ++i) {
        const double r = radius * i / rings;
        for (int j = 0; j < rays; ++j) {
            // theta in (-pi, pi), avoiding the slit itself
            const double t = -M_PI + (j + 0.5) * 2.0 * M_PI / rays;
            const Frame f = frame_from_coordinates(geom, 0.0, r * std::cos(t), r * std::sin(t));
            if (f.u0 <= 0.0) continue;
            out.push_back({f, series(r, t) / f.u0});
        }
    }
    return out;
}

XRPolynomial fit_tangent(const std::vector<Sample>& samples, const std::array<double, 3>& Z, int degree,
                         const FitOptions& options) {
    if (samples.empty()) throw InsufficientResolution("no samples to fit");
    const int n = samples.front().frame.n;
    const auto basis = monomials(n, degree);
    const int p = static_cast<int>(basis.size());
    const double l0 = options.lambda0;

    // dyadic shell of each sample and the U0^2 mass per shell
    std::map<int, double> mass;
    std::map<int, std::size_t> count;
    std::vector<int> level(samples.size(), -1);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const double rho = distance_to(samples[s].frame, Z);
        if (rho > l0 || rho <= 0.0 || samples[s].frame.u0 <= 0.0) continue;
        const int j = static_cast<int>(std::floor(std::log2(l0 / rho)));
        level[s] = j;
        mass[j] += samples[s].frame.u0 * samples[s].frame.u0;
        ++count[j];
    }
    std::size_t rows = 0;
    for (std::size_t s = 0; s < samples.size(); ++s)
        if (level[s] >= 0 && count[level[s]] >= static_cast<std::size_t>(options.min_annulus_samples)) ++rows;
    if (rows < static_cast<std::size_t>(p)) throw InsufficientResolution("fewer samples than unknowns");

    Eigen::MatrixXd A(rows, p);
    Eigen::VectorXd b(rows);
    std::size_t row = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const int j = level[s];
        if (j < 0 || count[j] < static_cast<std::size_t>(options.min_annulus_samples)) continue;
        const Frame& f = samples[s].frame;
        const double lj = l0 * std::ldexp(1.0, -j);
        const double w = f.u0 * f.u0 / mass[j] * std::pow(lj, -2.0 * (degree + options.alpha));
        const double sw = std::sqrt(w);
        std::array<double, 2> x{};
        for (int i = 0; i < n; ++i) x[i] = (f.X[i] - Z[i]) / l0;
        for (int c = 0; c < p; ++c) A(row, c) = sw * monomial_value(basis[c], x, n, f.r / l0);
        b[row] = sw * samples[s].value;
        ++row;
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    const auto& sv = svd.singularValues();
    const double cond = sv[0] / std::max(sv[p - 1], std::numeric_limits<double>::min());
    if (cond * cond > options.max_condition)
        throw IllConditioned("normal matrix condition " + std::to_string(cond * cond));
    const Eigen::VectorXd coef = qr.solve(b);

    XRPolynomial P(n);
    for (int c = 0; c < p; ++c) {
        const double v = coef[c] / std::pow(l0, basis[c].degree());
        if (v != 0.0) P.set(basis[c], rational_from_double(v));
    }
    return P;
}

XRPolynomial fit_tangent(const GridSolution& sol, const std::array<double, 3>& Z, int degree,
                         const FitOptions& options) {
    return fit_tangent(quotient_samples(sol), Z, degree, options);
}

XRPolynomial fit_tangent(const HalfAngleSeries& series, int degree, const FitOptions& options) {
    return fit_tangent(quotient_samples(series, options.lambda0, 400, 120), {0.0, 0.0, 0.0}, degree, options);
}

bool RateReport::passes(double margin, double max_residual) const {
    if (exact) return true;
    return usable && exponent >= target - margin && residual <= max_residual;
}

std::string RateReport::summary() const {
    std::ostringstream os;
    os << std::setprecision(6) << exponent << ',' << target << ',' << residual << ','
       << (passes() ? "pass" : "fail");
    return os.str();
}

RateReport make_rate_report(std::vector<double> scales, std::vector<double> errors, std::vector<std::size_t> counts,
                            double target) {
    if (scales.size() < 4) throw std::invalid_argument("at least 4 scales are required");
    if (errors.size() != scales.size()) throw std::invalid_argument("one error per scale is required");
    for (std::size_t j = 1; j < scales.size(); ++j)
        if (!(scales[j] < scales[j - 1])) throw std::invalid_argument("scales must be strictly decreasing");
    RateReport rep;
    rep.scales = std::move(scales);
    rep.errors = std::move(errors);
    rep.counts = std::move(counts);
    rep.target = target;
    rep.exact = std::all_of(rep.errors.begin(), rep.errors.end(), [](double e) { return e <= 1e-13; });
    if (rep.exact) {
        rep.exponent = std::numeric_limits<double>::infinity();
        return rep;
    }
    const std::size_t m = rep.scales.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> lx(m), ly(m);
    for (std::size_t j = 0; j < m; ++j) {
        lx[j] = std::log(rep.scales[j]);
        ly[j] = std::log(std::max(rep.errors[j], 1e-300));
        sx += lx[j];
        sy += ly[j];
        sxx += lx[j] * lx[j];
        sxy += lx[j] * ly[j];
    }
    const double N = static_cast<double>(m);
    rep.exponent = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    const double intercept = (sy - rep.exponent * sx) / N;
    double ss = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double e = ly[j] - (intercept + rep.exponent * lx[j]);
        ss += e * e;
    }
    rep.residual = std::sqrt(ss / N);
    rep.usable = rep.residual <= 0.5;
    return rep;
}

namespace {

template <class Err>
RateReport shell_report(const std::vector<Frame>& frames, Err&& error_of, const std::array<double, 3>& Z,
                        const std::vector<double>& scales, double target, std::size_t min_samples) {
    const std::size_t m = scales.size();
    std::vector<double> errors(m, 0.0);
    std::vector<std::size_t> counts(m, 0);
    for (std::size_t s = 0; s < frames.size(); ++s) {
        const double rho = distance_to(frames[s], Z);
        for (std::size_t j = 0; j < m; ++j) {
            const double inner = j + 1 < m ? scales[j + 1] : 0.5 * scales[j];
            if (rho <= scales[j] && rho > inner) {
                errors[j] = std::max(errors[j], error_of(s));
                ++counts[j];
                break;
            }
        }
    }
    if (!counts.empty() && counts.back() < min_samples)
        throw InsufficientResolution("smallest scale has " + std::to_string(counts.back()) + " samples, need " +
                                     std::to_string(min_samples));
    return make_rate_report(scales, errors, counts, target);
}

}  // namespace

RateReport rate_report(const std::vector<Sample>& samples, const XRPolynomial& P0, const std::array<double, 3>& Z,
                       const std::vector<double>& scales, double target, std::size_t min_samples) {
    std::vector<Frame> frames;
    frames.reserve(samples.size());
    for (const auto& s : samples) frames.push_back(s.frame);
    return shell_report(
        frames, [&](std::size_t s) { return std::abs(samples[s].value - evaluate_at(P0, samples[s].frame, Z)); }, Z,
        scales, target, min_samples);
}

std::vector<XRPolynomial> formal_gradient(const XRPolynomial& P0, const GammaJet& jet) {
    const int n = jet.n;
    const int N = jet.k + 1;
    const auto r = XRPolynomial::r(n);
    const auto Pr = P0.dr();
    const auto dPr = XRPolynomial::multiply_truncated(Pr, jet.d, N);
    std::vector<XRPolynomial> out;
    for (int i = 0; i < n; ++i) {
        XRPolynomial term = Rational(1, 2) * XRPolynomial::multiply_truncated(P0, jet.nu[i], N);
        term += XRPolynomial::multiply_truncated(r, P0.dx(i), N);
        term += XRPolynomial::multiply_truncated(dPr, jet.nu[i], N);
        out.push_back(term.truncated(N));
    }
    return out;
}

std::vector<XRPolynomial> formal_hessian(const XRPolynomial& P0, const GammaJet& jet) {
    const int n = jet.n;
    const int N = jet.k + 2;
    const auto grad = formal_gradient(P0, jet);
    const auto r = XRPolynomial::r(n);
    const auto half_r_minus_d = Rational(1, 2) * r - jet.d;
    const auto r2 = r * r;
    const auto rd = XRPolynomial::multiply_truncated(r, jet.d, N);
    std::vector<XRPolynomial> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& Pi = grad[i];
            XRPolynomial t = XRPolynomial::multiply_truncated(
                XRPolynomial::multiply_truncated(half_r_minus_d, Pi, N), jet.nu[j], N);
            t += XRPolynomial::multiply_truncated(r2, Pi.dx(j), N);
            t += XRPolynomial::multiply_truncated(XRPolynomial::multiply_truncated(rd, Pi.dr(), N), jet.nu[j], N);
            out.push_back(t.truncated(N));
        }
    return out;
}

namespace {

// Derivative of a nodal field along one axis: central inside, second-order
// one-sided at the ends, zero at b = 0 for fields even in b.
double axis_derivative(const GridSolution& sol, const std::vector<double>& F, std::size_t idx, int axis,
                       bool even_at_zero) {
    auto mi = sol.multi_index(idx);
    const int i = mi[axis];
    const int N = sol.shape[axis];
    const double h = sol.step[axis];
    auto at = [&](int k) {
        auto m = mi;
        m[axis] = k;
        return F[sol.index(m[0], m[1], m[2])];
    };
    if (i > 0 && i < N - 1) return (at(i + 1) - at(i - 1)) / (2 * h);
    if (i == 0) {
        if (even_at_zero) return 0.0;
        return (-3 * at(0) + 4 * at(1) - at(2)) / (2 * h);
    }
    return (3 * at(N - 1) - 4 * at(N - 2) + at(N - 3)) / (2 * h);
}

struct GradedLocal {
    double s, a, b, r, d, hs;
    std::array<double, 2> tau, nu;
};

GradedLocal graded_local(const GridSolution& sol, std::size_t idx) {
    const int D = sol.dims;
    const int off = D == 3 ? 1 : 0;
    auto mi = sol.multi_index(idx);
    GradedLocal L{};
    L.s = D == 3 ? sol.coord(0, mi[0]) : 0.0;
    L.a = sol.coord(off, mi[off]);
    L.b = sol.coord(off + 1, mi[off + 1]);
    L.r = L.a * L.a + L.b * L.b;
    L.d = L.a * L.a - L.b * L.b;
    L.hs = metric_factor(sol.geom, L.s, L.d);
    if (sol.geom.n == 1) {
        L.nu = {1.0, 0.0};
    } else {
        const double gp = sol.geom.dg_at(L.s);
        const double J = std::sqrt(1 + gp * gp);
        L.tau = {1 / J, gp / J};
        L.nu = {-gp / J, 1 / J};
    }
    return L;
}

std::vector<std::vector<double>> graded_gradient_field(const GridSolution& sol) {
    const int D = sol.dims;
    const int n = sol.geom.n;
    const int off = D == 3 ? 1 : 0;
    const int aax = off, bax = off + 1;
    const std::size_t total = sol.size();
    const double ha = sol.step[aax];

    std::vector<double> W(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto mi = sol.multi_index(idx);
        const double a = sol.coord(aax, mi[aax]);
        if (mi[aax] > 0) {
            W[idx] = sol.values[idx] / a;
        } else {
            // u = W a + O(a^2): cubic extrapolation of u / a to a = 0
            auto u_at = [&](int k) {
                auto m = mi;
                m[aax] = k;
                return sol.values[sol.index(m[0], m[1], m[2])];
            };
            W[idx] = (18 * u_at(1) - 9 * u_at(2) + 2 * u_at(3)) / (6 * ha);
        }
    }

    // scaled gradient G_i = (r/U0) d_i u
    std::vector<std::vector<double>> G(n, std::vector<double>(total));
    for (std::size_t idx = 0; idx < total; ++idx) {
        const GradedLocal L = graded_local(sol, idx);
        const double Wa = axis_derivative(sol, W, idx, aax, false);
        const double Wb = axis_derivative(sol, W, idx, bax, true);
        const double Ws = D == 3 ? axis_derivative(sol, W, idx, 0, false) : 0.0;
        for (int i = 0; i < n; ++i) {
            double g = L.nu[i] * 0.5 * (W[idx] + L.a * Wa - L.b * Wb);
            if (D == 3) g += L.tau[i] * L.r * Ws / L.hs;
            G[i][idx] = g;
        }
    }

    return G;
}

std::vector<DerivativeSample> graded_derivatives(const GridSolution& sol) {
    const int D = sol.dims;
    const int n = sol.geom.n;
    const int off = D == 3 ? 1 : 0;
    const int aax = off, bax = off + 1;
    const std::size_t total = sol.size();
    const auto G = graded_gradient_field(sol);

    std::vector<DerivativeSample> out;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (sol.kind[idx] != NodeKind::Unknown) continue;
        const GradedLocal L = graded_local(sol, idx);
        if (L.a <= 0.0) continue;
        DerivativeSample ds;
        ds.frame = sol.node_frame(idx);
        for (int i = 0; i < n; ++i) {
            ds.grad[i] = G[i][idx];
            const double Ga = axis_derivative(sol, G[i], idx, aax, false);
            const double Gb = axis_derivative(sol, G[i], idx, bax, true);
            const double Gs = D == 3 ? axis_derivative(sol, G[i], idx, 0, false) : 0.0;
            for (int j = 0; j < n; ++j) {
                double h = L.nu[j] * (0.5 * L.r - L.d) * G[i][idx] + L.nu[j] * 0.5 * L.r * (L.a * Ga - L.b * Gb);
                if (D == 3) h += L.r * L.r * L.tau[j] * Gs / L.hs;
                ds.hess[i * n + j] = h;
            }
        }
        out.push_back(ds);
    }
    return out;
}

std::vector<DerivativeSample> uniform_derivatives(const GridSolution& sol) {
    const int n = sol.geom.n;
    std::vector<DerivativeSample> out;
    const double h = sol.spec.h;
    for (std::size_t idx = 0; idx < sol.size(); ++idx) {
        if (sol.kind[idx] != NodeKind::Unknown) continue;
        const auto mi = sol.multi_index(idx);
        auto val = [&](int di, int dj) -> double {
            auto m = mi;
            m[0] += di;
            if (n == 2) m[1] += dj;
            if (m[0] < 0 || m[0] >= sol.shape[0] || m[1] < 0 || m[1] >= sol.shape[1])
                return std::numeric_limits<double>::quiet_NaN();
            return sol.values[sol.index(m[0], m[1], m[2])];
        };
        const Frame f = sol.node_frame(idx);
        if (f.u0 <= 0.0) continue;
        DerivativeSample ds;
        ds.frame = f;
        const double c = val(0, 0);
        const double s1 = f.r / f.u0, s2 = f.r * f.r * f.r / f.u0;
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            const int pi = i == 0 ? 1 : 0, pj = i == 1 ? 1 : 0;
            ds.grad[i] = s1 * (val(pi, pj) - val(-pi, -pj)) / (2 * h);
            ds.hess[i * n + i] = s2 * (val(pi, pj) - 2 * c + val(-pi, -pj)) / (h * h);
        }
        if (n == 2) {
            const double mixed = (val(1, 1) - val(1, -1) - val(-1, 1) + val(-1, -1)) / (4 * h * h);
            ds.hess[1] = ds.hess[2] = s2 * mixed;
        }
        for (int q = 0; q < n; ++q) ok = ok && std::isfinite(ds.grad[q]);
        for (int q = 0; q < n * n; ++q) ok = ok && std::isfinite(ds.hess[q]);
        if (ok) out.push_back(ds);
    }
    return out;
}

}  // namespace

std::vector<std::vector<double>> scaled_gradient_field(const GridSolution& sol) {
    if (sol.spec.grading == Grading::Sqrt) return graded_gradient_field(sol);
    const int n = sol.geom.n;
    std::vector<std::vector<double>> G(n, std::vector<double>(sol.size(), std::numeric_limits<double>::quiet_NaN()));
    for (const auto& ds : uniform_derivatives(sol)) {
        std::array<double, 3> X = ds.frame.X;
        std::array<int, 3> mi{};
        for (int a = 0; a < sol.dims; ++a) mi[a] = static_cast<int>(std::lround((X[a] - sol.lo[a]) / sol.step[a]));
        const std::size_t idx = sol.index(mi[0], mi[1], mi[2]);
        for (int i = 0; i < n; ++i) G[i][idx] = ds.grad[i];
    }
    return G;
}

std::vector<DerivativeSample> scaled_derivatives(const GridSolution& sol) {
    return sol.spec.grading == Grading::Sqrt ? graded_derivatives(sol) : uniform_derivatives(sol);
}

RateReport derivative_rate_checks(const GridSolution& sol, const XRPolynomial& P0, const GammaJet& jet,
                                  const std::array<double, 3>& Z, const std::vector<double>& scales, int order,
                                  double target, std::size_t min_samples) {
    if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
    const int n = sol.geom.n;
    const auto formal = order == 1 ? formal_gradient(P0, jet) : formal_hessian(P0, jet);
    const double core = core_radius(sol);
    std::vector<DerivativeSample> kept;
    for (auto& ds : scaled_derivatives(sol)) {
        const Frame& f = ds.frame;
        if (f.r < core) continue;
        double xp = 0.0;
        for (int i = 0; i + 1 < n; ++i) xp += (f.X[i] - Z[i]) * (f.X[i] - Z[i]);
        if (f.r < std::sqrt(xp)) continue;
        kept.push_back(ds);
    }
    std::vector<Frame> frames;
    for (const auto& ds : kept) frames.push_back(ds.frame);
    auto err = [&](std::size_t s) {
        double e = 0.0;
        const auto& ds = kept[s];
        for (std::size_t c = 0; c < formal.size(); ++c) {
            const double num = order == 1 ? ds.grad[c] : ds.hess[c];
            e = std::max(e, std::abs(num - evaluate_at(formal[c], ds.frame, Z)));
        }
        return e;
    };
    return shell_report(frames, err, Z, scales, target, min_samples);
}

void write_rate_csv(const RateReport& report, std::ostream& out) {
    out << "scale,sup_error\n";
    out << std::setprecision(17);
    for (std::size_t j = 0; j < report.scales.size(); ++j) out << report.scales[j] << ',' << report.errors[j] << '\n';
    out << "fitted_exponent,target,residual,pass\n" << report.summary() << '\n';
}

void write_rate_svg(const RateReport& report, std::ostream& out, const std::string& title) {
    constexpr double W = 480, H = 360, M = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (std::size_t j = 0; j < report.scales.size(); ++j) {
        const double x = std::log10(report.scales[j]);
        const double y = std::log10(std::max(report.errors[j], 1e-300));
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };
    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<text x=\"" << M << "\" y=\"20\" font-size=\"14\">" << title << " (slope " << report.exponent
        << ", target " << report.target << ")</text>\n";
    out << "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t j = 0; j < report.scales.size(); ++j)
        out << px(std::log10(report.scales[j])) << ',' << py(std::log10(std::max(report.errors[j], 1e-300))) << ' ';
    out << "\"/>\n";
    for (std::size_t j = 0; j < report.scales.size(); ++j)
        out << "<circle r=\"3\" cx=\"" << px(std::log10(report.scales[j])) << "\" cy=\""
            << py(std::log10(std::max(report.errors[j], 1e-300))) << "\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" font-size=\"12\">log10 scale</text>\n";
    out << "<text x=\"5\" y=\"" << H / 2 << "\" font-size=\"12\">log10 error</text>\n";
    out << "</svg>\n";
}

}  // namespace slitkit
