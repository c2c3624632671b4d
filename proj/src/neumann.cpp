#include "slitkit/neumann.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "slitkit/errors.hpp"

namespace slitkit {
namespace {

XRPolynomial r_power(int n, int m) { return XRPolynomial::monomial(n, Monomial{{0, 0}, m}); }

XRPolynomial quotient_bracket(const Monomial& mono, const GammaJet& jet, int K) {
    const int n = jet.n;
    const int m = mono.m;
    XRPolynomial out(n);
    for (int i = 0; i < n; ++i) {
        if (mono.mu[i] < 2) continue;
        Monomial lowered = mono;
        lowered.mu[i] -= 2;
        lowered.m += 2;
        out.add(lowered, Rational(mono.mu[i] * (mono.mu[i] - 1)));
    }
    if (m >= 2) out.add(mono, Rational((m - 1) * m));

    const XRPolynomial xmu = XRPolynomial::monomial(n, Monomial{mono.mu, 0});
    XRPolynomial inner = -XRPolynomial::multiply_truncated(jet.kappa, xmu, K);
    for (int i = 0; i < n; ++i) {
        if (mono.mu[i] == 0) continue;
        Monomial lowered{mono.mu, 0};
        --lowered.mu[i];
        inner += XRPolynomial::multiply_truncated(jet.nu[i], XRPolynomial::monomial(n, lowered, Rational(2 * mono.mu[i])), K);
    }
    XRPolynomial weight = Rational(1, 2) * r_power(n, m + 1);
    if (m != 1) weight += XRPolynomial::multiply_truncated(Rational(m - 1) * jet.d, r_power(n, m), K);
    out += XRPolynomial::multiply_truncated(weight, inner, K);
    return out.truncated(K);
}

// sum_j q_j (z1 + tangent)^j, or the constant for n = 1
XRPolynomial compose_tangential(const XRPolynomial& Q, const GammaJet& jet, int K) {
    const int n = jet.n;
    if (n == 1) return XRPolynomial::constant(1, Q.coeff(Monomial{}));
    const XRPolynomial y1 = jet.tangent + XRPolynomial::constant(2, jet.center);
    XRPolynomial out(2), power = XRPolynomial::constant(2, 1);
    for (int j = 0; j <= Q.degree(); ++j) {
        out += Q.coeff(Monomial{{j, 0}, 0}) * power;
        power = XRPolynomial::multiply_truncated(power, y1, K);
    }
    return out.truncated(K);
}

// x_2 = G(x_1) on Gamma in jet coordinates, from d(x1, G) = 0.
XRPolynomial gamma_curve(const GammaJet& jet, int K) {
    XRPolynomial G(2);
    const XRPolynomial d0 = jet.d.at_r_zero();
    for (int it = 0; it <= K + 1; ++it) {
        XRPolynomial value(2);
        for (const auto& [mono, c] : d0.terms()) {
            XRPolynomial term = XRPolynomial::monomial(2, Monomial{{mono.mu[0], 0}, 0}, c);
            for (int b = 0; b < mono.mu[1]; ++b) term = XRPolynomial::multiply_truncated(term, G, K);
            value += term;
        }
        G = (G - value).truncated(K);
    }
    return G;
}

// f(x1, G(x1)) for an r-free polynomial, as a polynomial in x1.
XRPolynomial restrict_to_gamma(const XRPolynomial& f, const XRPolynomial& G, int K) {
    XRPolynomial out(2);
    const XRPolynomial f0 = f.at_r_zero();
    for (const auto& [mono, c] : f0.terms()) {
        XRPolynomial term = XRPolynomial::monomial(2, Monomial{{mono.mu[0], 0}, 0}, c);
        for (int b = 0; b < mono.mu[1]; ++b) term = XRPolynomial::multiply_truncated(term, G, K);
        out += term;
    }
    return out.truncated(K);
}

template <class Fn>
void for_each_x_monomial(int n, int degree, Fn&& fn) {
    for (int a = degree; a >= 0; --a) {
        if (n == 1) {
            fn(std::array<int, 2>{degree, 0});
            return;
        }
        fn(std::array<int, 2>{a, degree - a});
    }
}

// value and derivative at 0 of the quadratic through (t_j, w_j)
std::pair<double, double> quadratic_at_zero(const std::array<double, 3>& t, const std::array<double, 3>& w) {
    double value = 0.0, slope = 0.0;
    for (int j = 0; j < 3; ++j) {
        const double a = t[(j + 1) % 3], b = t[(j + 2) % 3];
        const double den = (t[j] - a) * (t[j] - b);
        value += w[j] * a * b / den;
        slope += -w[j] * (a + b) / den;
    }
    return {value, slope};
}

std::array<double, 2> unit_normal(const SlitGeometry& geom, double s) {
    if (geom.n == 1) return {1.0, 0.0};
    const double gp = geom.dg_at(s);
    const double J = std::sqrt(1 + gp * gp);
    return {-gp / J, 1 / J};
}

}  // namespace

XRPolynomial laplacian_of_quotient(const XRPolynomial& V, const GammaJet& jet, int max_degree) {
    if (V.dim() != jet.n) throw std::invalid_argument("polynomial and jet dimensions differ");
    XRPolynomial out(jet.n);
    for (const auto& [mono, c] : V.terms()) out += c * quotient_bracket(mono, jet, max_degree);
    return out;
}

XRPolynomial constant_T(int n, int k, const XRPolynomial& Q, const FreeCoefficients& free) {
    if (Q.dim() != n) throw std::invalid_argument("Q has the wrong dimension");
    validate_tangential(Q, k + 2);
    XRPolynomial T = Q;
    for (const auto& [mono, value] : free) {
        if (mono.m != 1 || mono.mu[n - 1] == 0 || mono.degree() > k + 2)
            throw std::invalid_argument("free coefficients are b_{mu,1} with mu_n != 0 and degree <= k + 2");
        T.set(mono, value);
    }
    for (int D = 2; D <= k + 2; ++D)
        for (int m = 2; m <= D; ++m)
            for_each_x_monomial(n, D - m, [&](std::array<int, 2> sigma) {
                Rational acc = Rational(sigma[n - 1] + 1) * T.coeff(Monomial{{sigma[0] + (n == 1), sigma[1] + (n == 2)}, m - 1});
                for (int i = 0; i < n; ++i) {
                    auto up = sigma;
                    up[i] += 2;
                    acc += Rational((sigma[i] + 1) * (sigma[i] + 2)) * T.coeff(Monomial{up, m - 2});
                }
                if (acc != 0) T.set(Monomial{sigma, m}, -acc / Rational((m - 1) * (m + 2 * sigma[n - 1])));
            });
    if (!laplacian_of_quotient(T, GammaJet::flat_jet(n, k), k + 2).is_zero())
        throw SingularSystem("recursion left a nonzero Laplacian");
    return T;
}

double normal_difference(const XRPolynomial& T, std::span<const double> z, double t) {
    const int n = T.dim();
    std::array<double, 2> x{};
    for (int i = 0; i < n; ++i) x[i] = z[i];
    const double base = T.evaluate(std::span<const double>(x.data(), n), 0.0);
    x[n - 1] += t;
    return (T.evaluate(std::span<const double>(x.data(), n), t) - base) / t;
}

NeumannPair solve_pair_systems(const GammaJet& jet, const XRPolynomial& P_n0, const XRPolynomial& Q,
                               const FreeCoefficients& free, int k) {
    const int n = jet.n;
    const int K = k + 2;
    if (Q.dim() != n || P_n0.dim() != n) throw std::invalid_argument("dimension mismatch");
    validate_tangential(Q, K);
    if (!jet.flat && jet.order < k + 1) throw std::invalid_argument("jet order must be at least k + 1");
    if (P_n0.coeff(Monomial{}) == 0) throw SingularSystem("P_n0 vanishes at the base point");

    NeumannPair pair;
    pair.n = n;
    pair.k = k;
    pair.Q = Q;
    pair.P_n0 = P_n0;
    pair.P = XRPolynomial(n);
    for (const auto& [mono, value] : free) {
        if (mono.m != 0 || mono.mu[n - 1] == 0 || mono.degree() > k + 1)
            throw std::invalid_argument("free coefficients are a_{mu,0} with mu_n != 0 and degree <= k + 1");
        pair.P.set(mono, value);
    }
    const XRPolynomial Qy = compose_tangential(Q, jet, K);

    // boundary system: P(x, 0) + P_n0 d_nu(Q o y') = O(|x'|^{k+2}) on Gamma
    XRPolynomial dnuQ(n);
    for (int i = 0; i < n; ++i) dnuQ += XRPolynomial::multiply_truncated(jet.nu[i], Qy.dx(i), k + 1);
    const XRPolynomial flux = XRPolynomial::multiply_truncated(P_n0.at_r_zero(), dnuQ, k + 1);
    if (n == 1) {
        pair.P.add(Monomial{}, -(pair.P.at_r_zero() + flux).coeff(Monomial{}));
    } else {
        const XRPolynomial G = gamma_curve(jet, k + 1);
        const XRPolynomial F = restrict_to_gamma(pair.P + flux, G, k + 1);
        for (int a = 0; a <= k + 1; ++a) pair.P.add(Monomial{{a, 0}, 0}, -F.coeff(Monomial{{a, 0}, 0}));
    }

    // interior system: the x^sigma r^{l+1} coefficient of B(V) fixes a_{sigma l}
    const XRPolynomial base = XRPolynomial::multiply_truncated(P_n0, Qy, K);
    XRPolynomial B = laplacian_of_quotient(base + XRPolynomial::multiply_truncated(XRPolynomial::r(n), pair.P, K), jet, K);
    for (int D = 1; D <= k + 1; ++D)
        for (int l = 1; l <= D; ++l)
            for_each_x_monomial(n, D - l, [&](std::array<int, 2> sigma) {
                const Monomial eq{sigma, l + 1};
                const int diag = l * (l + 1 + 2 * sigma[n - 1]);
                const Rational value = -B.coeff(eq) / Rational(diag);
                if (value == 0) return;
                pair.P.add(Monomial{sigma, l}, value);
                B += value * quotient_bracket(Monomial{sigma, l + 1}, jet, K);
            });
    pair.V = (base + XRPolynomial::multiply_truncated(XRPolynomial::r(n), pair.P, K)).truncated(K);
    pair.residual = laplacian_of_quotient(pair.V, jet, K);
    for (const auto& [mono, c] : pair.residual.terms())
        if (mono.m >= 2) throw SingularSystem("interior system left " + pair.residual.to_string());
    return pair;
}

QuotientField quotient(const GridSolution& u, int i, double radius) {
    const int n = u.geom.n;
    if (i < 0 || i >= n) throw std::invalid_argument("quotient component out of range");
    const auto G = scaled_gradient_field(u);
    const bool graded = u.spec.grading == Grading::Sqrt;
    const double core = core_radius(u);

    QuotientField w;
    w.component = i;
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
        if (u.kind[idx] != NodeKind::Unknown) continue;
        const double gn = G[n - 1][idx], gi = G[i][idx];
        if (!std::isfinite(gn) || !std::isfinite(gi)) continue;
        const Frame f = u.node_frame(idx);
        if (f.u0 <= 0.0 || f.r < core) continue;
        double norm2 = 0.0;
        for (int a = 0; a <= n; ++a) norm2 += f.X[a] * f.X[a];
        if (norm2 > radius * radius) continue;
        if (gn <= 0.0) throw DegenerateWeight("u_n <= 0 at a sampled node");
        w.samples.push_back({f, gi / gn});
    }

    auto add_trace = [&](double s, const std::array<double, 3>& t, const std::array<double, 3>& vals) {
        for (double v : vals)
            if (!std::isfinite(v)) return;
        const auto [value, slope] = quadratic_at_zero(t, vals);
        TracePoint tp;
        tp.s = s;
        tp.z = {n == 2 ? s : 0.0, n == 2 ? u.geom.g_at(s) : 0.0};
        if (std::hypot(tp.z[0], tp.z[1]) > radius) return;
        tp.trace = value;
        tp.normal_derivative = slope;
        w.trace.push_back(tp);
    };

    if (graded) {
        const int aax = u.dims == 3 ? 1 : 0;
        if (u.shape[aax] <= 8) throw InsufficientResolution("need more than 8 cells in a");
        const double ha = u.step[aax];
        const std::array<int, 3> pick{2, 4, 8};
        const std::array<double, 3> t{std::pow(2 * ha, 2), std::pow(4 * ha, 2), std::pow(8 * ha, 2)};
        const int ns = u.dims == 3 ? u.shape[0] : 1;
        for (int is = 0; is < ns; ++is) {
            const double s = u.dims == 3 ? u.coord(0, is) : 0.0;
            if (n == 2 && std::hypot(s, u.geom.g_at(s)) > radius) continue;
            std::array<double, 3> vals{};
            for (int j = 0; j < 3; ++j) {
                const std::size_t idx = u.dims == 3 ? u.index(is, pick[j], 0) : u.index(pick[j], 0);
                const double gn = G[n - 1][idx];
                if (!(gn > 0.0)) throw DegenerateWeight("u_n <= 0 near Gamma");
                vals[j] = G[i][idx] / gn;
            }
            add_trace(s, t, vals);
        }
    } else {
        GridSolution wf = u;
        for (std::size_t idx = 0; idx < u.size(); ++idx) {
            const double gn = G[n - 1][idx];
            wf.values[idx] = gn > 0.0 ? G[i][idx] / gn : std::numeric_limits<double>::quiet_NaN();
        }
        const double h = u.spec.h;
        const std::array<double, 3> t{2 * h, 4 * h, 8 * h};
        std::vector<double> params{0.0};
        if (n == 2) {
            params.clear();
            for (int j = 0; j < u.shape[0]; ++j) params.push_back(u.coord(0, j));
        }
        for (double s : params) {
            const auto nu = unit_normal(u.geom, s);
            const double z2 = n == 2 ? u.geom.g_at(s) : 0.0;
            std::array<double, 3> vals{};
            try {
                for (int j = 0; j < 3; ++j) {
                    std::array<double, 3> X{};
                    if (n == 1) {
                        X = {t[j], 0.0, 0.0};
                    } else {
                        X = {s + t[j] * nu[0], z2 + t[j] * nu[1], 0.0};
                    }
                    vals[j] = wf.evaluate(std::span<const double>(X.data(), u.dims));
                }
            } catch (const OutOfDomain&) {
                continue;
            }
            add_trace(s, t, vals);
        }
    }
    return w;
}

TraceCheck check_trace(const QuotientField& w, const SlitGeometry& geom, double s_max) {
    TraceCheck check;
    const int n = geom.n;
    for (const auto& tp : w.trace) {
        if (std::abs(tp.s) > s_max) continue;
        const auto nu = unit_normal(geom, tp.s);
        const double expected = nu[w.component] / nu[n - 1];
        check.max_error = std::max(check.max_error, std::abs(tp.trace - expected));
        check.scale = std::max(check.scale, std::abs(expected));
        ++check.points;
    }
    if (check.points == 0) throw InsufficientResolution("no trace points within the requested range");
    return check;
}

NeumannRate neumann_rate(const QuotientField& w, const std::array<double, 3>& Z, int k,
                         const std::vector<double>& scales, double alpha, std::size_t min_samples) {
    NeumannRate out;
    out.tangent = fit_tangent(w.samples, Z, k + 2);
    out.report = rate_report(w.samples, out.tangent, Z, scales, k + 2 + alpha, min_samples);
    return out;
}

WQPReport build_WQP(const NeumannPair& pair, const GridSolution& u, const std::array<double, 3>& Z,
                    const std::vector<double>& scales, const Mollifier* rho, double alpha) {
    if (u.spec.grading != Grading::Sqrt || u.geom.n != 2)
        throw std::invalid_argument("build_WQP needs a sqrt-graded grid with n = 2");
    if (scales.empty()) throw std::invalid_argument("no scales");
    const auto G = scaled_gradient_field(u);
    const auto& Gn = G[1];
    const double core = core_radius(u);
    const double reach = scales.front() * 1.5;
    std::optional<WhitneyExtension> E;
    if (rho) E.emplace(pair.Q, u.geom, *rho);

    WQPReport rep;
    rep.W.assign(u.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
        const Frame f = u.node_frame(idx);
        if (std::hypot(f.X[0] - Z[0], f.X[1] - Z[1], f.X[2]) > reach) continue;
        double q;
        if (E) {
            const std::array<double, 2> x{f.X[0], f.X[1]};
            try {
                q = (*E)(x);
            } catch (const OutOfChart&) {
                continue;
            }
        } else {
            const std::array<double, 2> y{f.s, 0.0};
            q = pair.Q.evaluate(y, 0.0);
        }
        if (f.r > 0.0) {
            if (!(Gn[idx] > 0.0)) throw DegenerateWeight("u_n <= 0 near Gamma");
            q += f.r * evaluate_at(pair.P, f, Z) / Gn[idx];
        }
        rep.W[idx] = q;
    }

    // W_nu on Gamma: d_nu Q~ + P(z, 0) / G_n(z), since r = t along nu
    std::vector<Sample> boundary;
    for (int is = 0; is < u.shape[0]; ++is) {
        const double s = u.coord(0, is);
        const Frame f = frame_from_coordinates(u.geom, s, 0.0, 0.0);
        if (std::hypot(f.X[0] - Z[0], f.X[1] - Z[1]) > scales.front()) continue;
        const double gn = Gn[u.index(is, 0, 0)];
        if (!(gn > 0.0)) throw DegenerateWeight("u_n <= 0 on Gamma");
        double dq = 0.0;
        if (E) {
            const double eps = 1e-4;
            const std::array<double, 2> p{f.X[0] + eps * f.nu[0], f.X[1] + eps * f.nu[1]};
            const std::array<double, 2> q{f.X[0] - eps * f.nu[0], f.X[1] - eps * f.nu[1]};
            dq = ((*E)(p) - (*E)(q)) / (2 * eps);
        }
        boundary.push_back({f, std::abs(dq + evaluate_at(pair.P, f, Z) / gn)});
    }
    rep.boundary = rate_report(boundary, XRPolynomial(2), Z, scales, pair.k + 1 + alpha, 1);

    // (r / U0) Delta_h(u_n W) with u_n = (U0 / r) G_n
    GridSolution F = u;
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
        const Frame f = u.node_frame(idx);
        F.values[idx] = f.u0 > 0.0 && f.r > 0.0 ? f.u0 / f.r * Gn[idx] * rep.W[idx] : 0.0;
    }
    std::vector<Sample> interior;
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
        if (u.kind[idx] != NodeKind::Unknown) continue;
        const Frame f = u.node_frame(idx);
        if (f.u0 <= 0.0 || f.r < core) continue;
        if (f.r < std::abs(f.X[0] - Z[0])) continue;
        const double lap = discrete_laplacian(F, idx);
        if (!std::isfinite(lap)) continue;
        interior.push_back({f, std::abs(lap * f.r / f.u0)});
    }
    rep.interior = rate_report(interior, XRPolynomial(2), Z, scales, pair.k + alpha, 1);
    return rep;
}

}  // namespace slitkit
