#include "slitkit/solver.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <boost/math/quadrature/gauss.hpp>

#include "slitkit/errors.hpp"

namespace slitkit {

// ---------------------------------------------------------------------------
// half-angle series

double HalfAngleSeries::operator()(double r, double theta) const {
    double sum = 0.0;
    for (int j = 0; j < size(); ++j) sum += c[j] * std::pow(r, q(j)) * std::cos(q(j) * theta);
    return sum;
}

double HalfAngleSeries::at(double x1, double x2) const {
    const double r = std::hypot(x1, x2);
    if (r == 0.0) return 0.0;
    double theta = std::atan2(x2, x1);
    if (x2 == 0.0 && x1 < 0.0) theta = M_PI;
    return (*this)(r, theta);
}

std::array<double, 2> HalfAngleSeries::gradient(double x1, double x2) const {
    // d/dx1 - i d/dx2 of Re(c z^q) = Re(c q z^{q-1})
    const double r = std::hypot(x1, x2);
    if (r == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
    double theta = std::atan2(x2, x1);
    double gx = 0.0, gy = 0.0;
    for (int j = 0; j < size(); ++j) {
        const double qq = q(j);
        const double mag = c[j] * qq * std::pow(r, qq - 1.0);
        gx += mag * std::cos((qq - 1.0) * theta);
        gy -= mag * std::sin((qq - 1.0) * theta);
    }
    return {gx, gy};
}

double HalfAngleSeries::tail_bound(double rho) const {
    if (c.empty() || rho >= 1.0) return c.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    const double last = std::abs(c.back());
    return last * std::pow(rho, q(size())) / (1.0 - rho);
}

HalfAngleSeries solve_series_2d(const std::function<double(double)>& phi, int N, double tolerance) {
    if (N < 1) throw std::invalid_argument("series truncation must be positive");
    using boost::math::quadrature::gauss;
    HalfAngleSeries series;
    series.tolerance = tolerance;
    series.c.resize(N);
    // composite 20-point Gauss-Legendre; kinks at 0 and pi sit on panel ends,
    // and the gap between 32 and 64 panels is the error estimate
    auto composite = [](const auto& f, int panels, double& l1) {
        double sum = 0.0;
        l1 = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = M_PI * p / panels, b = M_PI * (p + 1) / panels;
            sum += gauss<double, 20>::integrate(f, a, b);
            l1 += gauss<double, 20>::integrate([&](double t) { return std::abs(f(t)); }, a, b);
        }
        return sum;
    };
    for (int j = 0; j < N; ++j) {
        const double qq = HalfAngleSeries::q(j);
        auto integrand = [&](double t) { return (phi(t) + phi(-t)) * std::cos(qq * t); };
        double l1 = 0.0, l1_fine = 0.0;
        const double coarse = composite(integrand, 32, l1);
        const double total = composite(integrand, 64, l1_fine);
        const double err = std::abs(total - coarse);
        if (!std::isfinite(total) || err > tolerance * std::max(1.0, l1_fine))
            throw SeriesUnresolved("quadrature error " + std::to_string(err) + " for q = " +
                                   std::to_string(qq));
        series.c[j] = total / M_PI;
    }
    if (std::abs(series.c.back()) > tolerance) {
        series.resolved = false;
        series.warning = "TruncationWarning: |c_N| = " + std::to_string(std::abs(series.c.back())) +
                         " exceeds tolerance";
    }
    return series;
}

// ---------------------------------------------------------------------------
// grid plumbing

std::string to_string(Grading g) { return g == Grading::Uniform ? "uniform" : "sqrt"; }

Grading grading_from_string(const std::string& s) {
    if (s == "uniform") return Grading::Uniform;
    if (s == "sqrt") return Grading::Sqrt;
    throw std::invalid_argument("unknown grading '" + s + "'");
}

std::array<double, 3> cutoff(double r) {
    constexpr double r0 = 0.125, width = 0.125;
    if (r <= r0) return {1.0, 0.0, 0.0};
    if (r >= r0 + width) return {0.0, 0.0, 0.0};
    const double t = (r - r0) / width;
    const double u = 1.0 - t;
    const double S = t * t * t * t * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
    const double dS = 140.0 * t * t * t * u * u * u;
    const double d2S = 420.0 * t * t * u * u * (1.0 - 2.0 * t);
    return {1.0 - S, -dS / width, -d2S / (width * width)};
}

std::size_t GridSolution::index(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + l;
}

std::array<int, 3> GridSolution::multi_index(std::size_t idx) const {
    const int l = static_cast<int>(idx % shape[2]);
    idx /= shape[2];
    const int j = static_cast<int>(idx % shape[1]);
    const int i = static_cast<int>(idx / shape[1]);
    return {i, j, l};
}

namespace {

SlitGeometry unbounded(SlitGeometry geom) {
    geom.domain_radius = std::numeric_limits<double>::infinity();
    return geom;
}

double hs_factor(const SlitGeometry& geom, double s, double d) { return metric_factor(geom, s, d); }

}  // namespace

double metric_factor(const SlitGeometry& geom, double s, double d) {
    if (geom.n == 1 || geom.is_flat()) return 1.0;
    const double gp = geom.dg_at(s);
    const double J = std::sqrt(1.0 + gp * gp);
    return J - geom.ddg_at(s) * d / (J * J);
}

double core_radius(const GridSolution& sol) {
    if (sol.spec.grading == Grading::Uniform) return 4.0 * sol.spec.h;
    const int off = sol.dims == 3 ? 1 : 0;
    const double ha = std::max(sol.step[off], sol.step[off + 1]);
    return 16.0 * ha * ha;
}

std::array<double, 3> GridSolution::node_point(std::size_t idx) const {
    return node_frame(idx).X;
}

Frame GridSolution::node_frame(std::size_t idx) const {
    const auto mi = multi_index(idx);
    if (spec.grading == Grading::Uniform) {
        std::array<double, 3> X{};
        for (int ax = 0; ax < dims; ++ax) X[ax] = coord(ax, mi[ax]);
        const SlitGeometry g = unbounded(geom);
        return closest_point_frame(g, std::span<const double>(X.data(), dims));
    }
    const int off = dims == 3 ? 1 : 0;
    const double s = dims == 3 ? coord(0, mi[0]) : 0.0;
    const double a = coord(off, mi[off]);
    const double b = coord(off + 1, mi[off + 1]);
    Frame f = frame_from_coordinates(geom, s, a * a - b * b, 2.0 * a * b);
    f.u0 = a;  // exact in these coordinates
    f.r = a * a + b * b;
    return f;
}

namespace {

struct Link {
    double coeff;
    long idx;                      // neighbour node, or -1 for a boundary point
    std::array<double, 3> point;   // boundary point when idx < 0
};

struct NodeStencil {
    std::vector<Link> links;
    double symmetry_weight = 1.0;  // 1/2 on mirrored rows
    double to_physical = 1.0;      // sum of links times this approximates the Laplacian
    bool complete = true;          // false when a neighbour is missing
};

double ball_crossing(const std::array<double, 3>& X, int axis, int dir, double h, int dims,
                     const std::array<double, 3>& C, double R) {
    // smallest t in (0, h] with |X + dir t e_axis - C| = R
    double b = 0.0, c = -R * R;
    for (int k = 0; k < dims; ++k) c += (X[k] - C[k]) * (X[k] - C[k]);
    b = dir * (X[axis] - C[axis]);
    const double disc = b * b - c;
    const double t = -b + std::sqrt(std::max(disc, 0.0));
    return std::clamp(t, 0.0, h);
}

NodeStencil build_stencil(const GridSolution& sol, std::size_t idx) {
    NodeStencil st;
    const auto mi = sol.multi_index(idx);
    const int D = sol.dims;
    if (sol.spec.grading == Grading::Uniform) {
        const double h = sol.spec.h;
        std::array<double, 3> X{};
        for (int ax = 0; ax < D; ++ax) X[ax] = sol.coord(ax, mi[ax]);
        std::array<double, 3> C{};
        C[D - 2] = sol.spec.center;
        for (int ax = 0; ax < D; ++ax) {
            for (int dir : {-1, 1}) {
                auto nb = mi;
                nb[ax] += dir;
                if (ax == D - 1 && nb[ax] < 0) {
                    // even reflection across the plane
                    auto mirror = mi;
                    mirror[ax] += 1;
                    st.links.push_back({1.0 / (h * h), static_cast<long>(sol.index(mirror[0], mirror[1], mirror[2])), {}});
                    st.symmetry_weight = 0.5;
                    continue;
                }
                const bool in_array = nb[ax] >= 0 && nb[ax] < sol.shape[ax];
                const NodeKind k = in_array ? sol.kind[sol.index(nb[0], nb[1], nb[2])] : NodeKind::Outside;
                if (k != NodeKind::Outside) {
                    st.links.push_back({1.0 / (h * h), static_cast<long>(sol.index(nb[0], nb[1], nb[2])), {}});
                    continue;
                }
                if (sol.spec.shape != DomainShape::Ball) {
                    st.complete = false;
                    continue;
                }
                const double t = ball_crossing(X, ax, dir, h, D, C, sol.spec.radius);
                std::array<double, 3> B = X;
                B[ax] += dir * t;
                st.links.push_back({1.0 / (t * h), -1, B});
            }
        }
        return st;
    }

    // sqrt grading, flux form
    const int off = D == 3 ? 1 : 0;
    const double s = D == 3 ? sol.coord(0, mi[0]) : 0.0;
    const double a = sol.coord(off, mi[off]);
    const double b = sol.coord(off + 1, mi[off + 1]);
    const auto& geom = sol.geom;
    const double z2 = a * a + b * b;
    st.to_physical = 1.0 / (4.0 * z2 * hs_factor(geom, s, a * a - b * b));
    for (int ax = 0; ax < D; ++ax) {
        const double hh = sol.step[ax];
        for (int dir : {-1, 1}) {
            auto nb = mi;
            nb[ax] += dir;
            if (ax == D - 1 && nb[ax] < 0) {
                nb[ax] = mi[ax] + 1;
                st.symmetry_weight = 0.5;
            }
            if (nb[ax] < 0 || nb[ax] >= sol.shape[ax]) {
                st.complete = false;
                continue;
            }
            // coefficient at the face midpoint; the mirrored face has the same value
            std::array<double, 3> mid{s, a, b};
            const int rel = ax - off;  // -1: s, 0: a, 1: b
            mid[rel + 1] += 0.5 * dir * hh;
            const double md = mid[1] * mid[1] - mid[2] * mid[2];
            const double hsf = hs_factor(geom, mid[0], md);
            const double kappa_face = rel < 0 ? 4.0 * (mid[1] * mid[1] + mid[2] * mid[2]) / hsf : hsf;
            st.links.push_back({kappa_face / (hh * hh), static_cast<long>(sol.index(nb[0], nb[1], nb[2])), {}});
        }
    }
    return st;
}

GridSolution make_grid(const SlitGeometry& geom, const GridSpec& spec) {
    geom.validate();
    if (!(spec.h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    GridSolution sol;
    sol.geom = geom;
    sol.spec = spec;
    sol.dims = geom.n + 1;
    const int D = sol.dims;
    const double h = spec.h;
    if (spec.grading == Grading::Uniform) {
        for (int ax = 0; ax < D; ++ax) {
            double lo, hi;
            if (ax == D - 1) {
                lo = 0.0;
                hi = spec.shape == DomainShape::Ball ? spec.radius : spec.height;
            } else if (spec.shape == DomainShape::Ball) {
                const double c = ax == D - 2 ? spec.center : 0.0;
                lo = std::floor((c - spec.radius) / h) * h;
                hi = std::ceil((c + spec.radius) / h) * h;
            } else {
                lo = -std::round(spec.half_width / h) * h;
                hi = -lo;
            }
            sol.lo[ax] = lo;
            sol.step[ax] = h;
            sol.shape[ax] = static_cast<int>(std::llround((hi - lo) / h)) + 1;
        }
    } else {
        const double hs = spec.hs > 0.0 ? spec.hs : h * spec.s_extent / spec.a_max;
        int ax = 0;
        if (D == 3) {
            const int cells = std::max(2, static_cast<int>(std::llround(2.0 * spec.s_extent / hs)));
            sol.lo[0] = -spec.s_extent;
            sol.step[0] = 2.0 * spec.s_extent / cells;
            sol.shape[0] = cells + 1;
            ax = 1;
        }
        const int ca = std::max(2, static_cast<int>(std::llround(spec.a_max / h)));
        const int cb = std::max(2, static_cast<int>(std::llround(spec.b_max / h)));
        sol.lo[ax] = 0.0;
        sol.step[ax] = spec.a_max / ca;
        sol.shape[ax] = ca + 1;
        sol.lo[ax + 1] = 0.0;
        sol.step[ax + 1] = spec.b_max / cb;
        sol.shape[ax + 1] = cb + 1;
    }
    std::size_t total = 1;
    for (int ax = 0; ax < 3; ++ax) total *= sol.shape[ax];
    sol.values.assign(total, 0.0);
    sol.kind.assign(total, NodeKind::Unknown);

    std::size_t slit = 0, plate = 0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const auto mi = sol.multi_index(idx);
        NodeKind k = NodeKind::Unknown;
        if (spec.grading == Grading::Uniform) {
            std::array<double, 3> X{};
            for (int a = 0; a < D; ++a) X[a] = sol.coord(a, mi[a]);
            if (spec.shape == DomainShape::Ball) {
                double dist2 = 0.0;
                for (int a = 0; a < D; ++a) {
                    const double c = a == D - 2 ? spec.center : 0.0;
                    dist2 += (X[a] - c) * (X[a] - c);
                }
                const double dist = std::sqrt(dist2);
                if (dist >= spec.radius * (1.0 - 1e-12)) k = NodeKind::Outside;
                else if (dist > spec.radius - 1e-3 * h) k = NodeKind::Boundary;  // avoids tiny cut cells
            } else {
                for (int a = 0; a < D; ++a) {
                    if (a == D - 1 ? mi[a] == sol.shape[a] - 1 : (mi[a] == 0 || mi[a] == sol.shape[a] - 1))
                        k = NodeKind::Boundary;
                }
            }
            if (k != NodeKind::Outside && mi[D - 1] == 0) {
                const double gx = D == 3 ? geom.g_at(X[0]) : 0.0;
                if (X[D - 2] <= gx - 0.5 * h) k = NodeKind::Slit;
            }
        } else {
            const int off = D == 3 ? 1 : 0;
            if (D == 3 && (mi[0] == 0 || mi[0] == sol.shape[0] - 1)) k = NodeKind::Boundary;
            if (mi[off] == sol.shape[off] - 1 || mi[off + 1] == sol.shape[off + 1] - 1) k = NodeKind::Boundary;
            if (mi[off] == 0) k = NodeKind::Slit;
        }
        sol.kind[idx] = k;
        if (k != NodeKind::Outside && mi[D - 1] == 0) {
            ++plate;
            if (k == NodeKind::Slit) ++slit;
        }
    }
    if (slit == 0 || slit == plate) throw MaskDegenerate("slit mask is empty or fills the plane");
    return sol;
}

// Singular part S = chi(r) U0 and its Laplacian, for splitting.
std::array<double, 2> split_profile(const Frame& f) {
    if (f.r == 0.0) return {0.0, 0.0};
    const auto [chi, dchi, d2chi] = cutoff(f.r);
    const double S = chi * f.u0;
    const double lap = -chi * f.kappa * f.u0 / (2.0 * f.r) +
                       f.u0 * (d2chi + dchi * (1.0 - f.kappa * f.d) / f.r) + dchi * f.u0 / f.r;
    return {S, lap};
}

double rhs_value(const Frame& f, const FieldSpec& fs) {
    if (!fs.fn) return 0.0;
    if (f.r == 0.0) return 0.0;
    return f.u0 / f.r * fs(f);
}

// Local fit u / U0 ~ c + sum a_i x_i + b r on the annulus 4h <= r <= 16h.
double fit_singular_coefficient(const GridSolution& sol, const std::vector<Frame>& frames) {
    const int n = sol.geom.n;
    const int cols = n + 2;
    std::vector<double> rows;
    std::vector<double> rhs;
    const double h = sol.spec.h;
    for (std::size_t idx = 0; idx < sol.size(); ++idx) {
        if (sol.kind[idx] != NodeKind::Unknown) continue;
        const Frame& f = frames[idx];
        if (f.r < 4 * h || f.r > 16 * h || f.u0 <= 0.0) continue;
        const double w = f.u0;  // sqrt of the U0^2 weight
        rows.push_back(w);
        for (int i = 0; i < n; ++i) rows.push_back(w * f.X[i]);
        rows.push_back(w * f.r);
        rhs.push_back(w * sol.values[idx] / f.u0);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(rhs.size());
    if (m < cols * 4) throw InsufficientResolution("too few nodes in the splitting annulus");
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(rows.data(), m, cols);
    Eigen::Map<Eigen::VectorXd> b(rhs.data(), m);
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    return coef[0];
}

}  // namespace

GridSolution sample_on_grid(const SlitGeometry& geom, const FieldSpec& fn, const GridSpec& grid) {
    GridSolution sol = make_grid(geom, grid);
    sol.boundary_descriptor = fn.descriptor;
    for (std::size_t idx = 0; idx < sol.size(); ++idx) sol.values[idx] = fn(sol.node_frame(idx));
    return sol;
}

GridSolution solve_fd(const SlitGeometry& geom, const FieldSpec& phi, const FieldSpec& f,
                      const GridSpec& grid) {
    GridSolution sol = make_grid(geom, grid);
    sol.boundary_descriptor = phi.descriptor;
    sol.rhs_descriptor = f.descriptor;
    const std::size_t total = sol.size();
    const SlitGeometry open = unbounded(geom);

    std::vector<Frame> frames(total);
    for (std::size_t idx = 0; idx < total; ++idx)
        if (sol.kind[idx] != NodeKind::Outside) frames[idx] = sol.node_frame(idx);

    std::vector<long> unknown(total, -1);
    long count = 0;
    for (std::size_t idx = 0; idx < total; ++idx)
        if (sol.kind[idx] == NodeKind::Unknown) unknown[idx] = count++;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (sol.kind[idx] == NodeKind::Boundary) sol.values[idx] = phi(frames[idx]);
        else if (sol.kind[idx] != NodeKind::Unknown) sol.values[idx] = 0.0;
    }

    const bool split = grid.splitting && grid.grading == Grading::Uniform;
    auto frame_of_point = [&](const std::array<double, 3>& P) {
        return closest_point_frame(open, std::span<const double>(P.data(), sol.dims));
    };

    // matrix (independent of the splitting constant)
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(count) * 7);
    std::vector<NodeStencil> stencils(static_cast<std::size_t>(count));
    std::vector<std::size_t> node_of(static_cast<std::size_t>(count));
    for (std::size_t idx = 0; idx < total; ++idx) {
        const long row = unknown[idx];
        if (row < 0) continue;
        NodeStencil st = build_stencil(sol, idx);
        if (!st.complete) throw std::logic_error("interior stencil left the grid");
        double diag = 0.0;
        for (const auto& link : st.links) {
            diag += link.coeff;
            if (link.idx >= 0 && unknown[link.idx] >= 0)
                trip.emplace_back(row, unknown[link.idx], -st.symmetry_weight * link.coeff);
        }
        trip.emplace_back(row, row, st.symmetry_weight * diag);
        stencils[row] = std::move(st);
        node_of[row] = idx;
    }
    Eigen::SparseMatrix<double> A(count, count);
    A.setFromTriplets(trip.begin(), trip.end());
    trip.clear();
    trip.shrink_to_fit();

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(grid.tolerance);
    cg.setMaxIterations(grid.max_iterations);
    cg.compute(A);

    // cache per-row data that does not depend on c
    std::vector<double> base_rhs(static_cast<std::size_t>(count));
    std::vector<double> split_rhs(split ? count : 0);
    for (long row = 0; row < count; ++row) {
        const auto& st = stencils[row];
        const Frame& fr = frames[node_of[row]];
        double target = rhs_value(fr, f);
        if (grid.grading == Grading::Sqrt) target = f.fn ? 4.0 * fr.u0 * hs_factor(geom, fr.s, fr.d) * f(fr) : 0.0;
        else target /= st.to_physical;
        double b = -target;
        double b_split = 0.0;
        for (const auto& link : st.links) {
            if (link.idx >= 0) {
                if (unknown[link.idx] < 0) b += link.coeff * sol.values[link.idx];
            } else {
                const Frame bf = frame_of_point(link.point);
                b += link.coeff * phi(bf);
                if (split) b_split -= link.coeff * split_profile(bf)[0];
            }
            if (split && link.idx >= 0 && unknown[link.idx] < 0)
                b_split -= link.coeff * split_profile(frames[link.idx])[0];
        }
        if (split) b_split += split_profile(fr)[1] / st.to_physical;
        base_rhs[row] = st.symmetry_weight * b;
        if (split) split_rhs[row] = st.symmetry_weight * b_split;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(count);
    double c = 0.0;
    const int passes = split ? std::max(1, grid.splitting_iterations) : 1;
    for (int pass = 0; pass < passes; ++pass) {
        Eigen::VectorXd rhs(count);
        for (long row = 0; row < count; ++row) rhs[row] = base_rhs[row] + (split ? c * split_rhs[row] : 0.0);
        x = cg.solveWithGuess(rhs, x);
        if (cg.info() != Eigen::Success)
            throw NonConvergence("conjugate gradient stopped at relative residual " + std::to_string(cg.error()));
        sol.iterations += static_cast<int>(cg.iterations());
        sol.residual = cg.error();
        for (long row = 0; row < count; ++row) {
            const Frame& fr = frames[node_of[row]];
            sol.values[node_of[row]] = x[row] + (split ? c * split_profile(fr)[0] : 0.0);
        }
        if (!split) break;
        const double c_new = fit_singular_coefficient(sol, frames);
        const bool settled = std::abs(c_new - c) < 1e-12 * std::max(1.0, std::abs(c_new));
        // v changes with c: shift the iterate so the warm start stays consistent
        for (long row = 0; row < count; ++row) x[row] -= (c_new - c) * split_profile(frames[node_of[row]])[0];
        c = c_new;
        if (settled) break;
    }
    if (split) {
        // final solve with the settled constant
        Eigen::VectorXd rhs(count);
        for (long row = 0; row < count; ++row) rhs[row] = base_rhs[row] + c * split_rhs[row];
        x = cg.solveWithGuess(rhs, x);
        if (cg.info() != Eigen::Success)
            throw NonConvergence("conjugate gradient stopped at relative residual " + std::to_string(cg.error()));
        sol.iterations += static_cast<int>(cg.iterations());
        sol.residual = cg.error();
        for (long row = 0; row < count; ++row)
            sol.values[node_of[row]] = x[row] + c * split_profile(frames[node_of[row]])[0];
        sol.splitting_coefficient = c;
    }
    for (std::size_t idx = 0; idx < total; ++idx)
        if (sol.kind[idx] == NodeKind::Outside) sol.values[idx] = std::numeric_limits<double>::quiet_NaN();
    return sol;
}

double discrete_laplacian(const GridSolution& sol, std::size_t idx) {
    if (sol.kind[idx] != NodeKind::Unknown) return std::numeric_limits<double>::quiet_NaN();
    const NodeStencil st = build_stencil(sol, idx);
    if (!st.complete) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    const double up = sol.values[idx];
    for (const auto& link : st.links) {
        if (link.idx < 0) return std::numeric_limits<double>::quiet_NaN();
        sum += link.coeff * (sol.values[link.idx] - up);
    }
    return sum * st.to_physical;
}

BarrierReport check_barrier(const SlitGeometry& geom, const GridSpec& grid) {
    FieldSpec barrier{"-U0+U0^2", [](const Frame& f) { return -f.u0 + f.u0 * f.u0; }};
    GridSpec g = grid;
    g.splitting = false;
    const GridSolution sol = sample_on_grid(geom, barrier, g);
    BarrierReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < sol.size(); ++idx) {
        if (sol.kind[idx] != NodeKind::Unknown) continue;
        const double lap = discrete_laplacian(sol, idx);
        if (!std::isfinite(lap)) continue;
        const Frame f = sol.node_frame(idx);
        if (f.r <= 0.0) continue;
        const double v = f.r * lap;
        ++rep.nodes;
        if (v < rep.min_value) {
            rep.min_value = v;
            rep.argmin = f.X;
        }
    }
    return rep;
}

namespace {

// Gauss-Legendre nodes on [0, 1], 2 points.
constexpr double kG0 = 0.5 - 0.28867513459481287;
constexpr double kG1 = 0.5 + 0.28867513459481287;

}  // namespace

EnergyReport compute_energy(const GridSolution& sol, double radius) {
    EnergyReport rep;
    const int D = sol.dims;
    const auto& sh = sol.shape;
    auto value = [&](int i, int j, int l) { return sol.values[sol.index(i, j, l)]; };
    const double R2 = radius * radius;
    const int corners = 1 << D;
    const std::array<double, 2> gp{kG0, kG1};

    // gradient part over cells, 2^D Gauss points each, reflected (factor 2)
    const int ni = sh[0] - 1, nj = sh[1] - 1, nl = D == 3 ? sh[2] - 1 : 1;
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j)
            for (int l = 0; l < nl; ++l) {
                std::array<double, 8> cv{};
                bool ok = true;
                for (int c = 0; c < corners; ++c) {
                    const int di = c & 1, dj = (c >> 1) & 1, dl = (c >> 2) & 1;
                    cv[c] = value(i + di, j + dj, D == 3 ? l + dl : 0);
                    if (!std::isfinite(cv[c])) ok = false;
                }
                if (!ok) continue;
                for (int q = 0; q < corners; ++q) {
                    const std::array<double, 3> t{gp[q & 1], gp[(q >> 1) & 1], D == 3 ? gp[(q >> 2) & 1] : 0.0};
                    // multilinear gradient in grid coordinates
                    std::array<double, 3> grad{};
                    for (int c = 0; c < corners; ++c) {
                        const std::array<int, 3> bit{c & 1, (c >> 1) & 1, (c >> 2) & 1};
                        for (int ax = 0; ax < D; ++ax) {
                            double w = bit[ax] ? 1.0 : -1.0;
                            for (int o = 0; o < D; ++o)
                                if (o != ax) w *= bit[o] ? t[o] : 1.0 - t[o];
                            grad[ax] += w * cv[c] / sol.step[ax];
                        }
                    }
                    std::array<double, 3> g{sol.coord(0, i) + t[0] * sol.step[0],
                                            sol.coord(1, j) + t[1] * sol.step[1],
                                            D == 3 ? sol.coord(2, l) + t[2] * sol.step[2] : 0.0};
                    double vol = 1.0;
                    for (int ax = 0; ax < D; ++ax) vol *= sol.step[ax];
                    vol /= corners;
                    double density;
                    if (sol.spec.grading == Grading::Uniform) {
                        double dist2 = 0.0;
                        for (int ax = 0; ax < D; ++ax) dist2 += g[ax] * g[ax];
                        if (dist2 >= R2) continue;
                        density = grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2];
                    } else {
                        const int off = D == 3 ? 1 : 0;
                        const double s = D == 3 ? g[0] : 0.0;
                        const double a = g[off], b = g[off + 1];
                        const Frame f = frame_from_coordinates(sol.geom, s, a * a - b * b, 2 * a * b);
                        double dist2 = 0.0;
                        for (int ax = 0; ax <= sol.geom.n; ++ax) dist2 += f.X[ax] * f.X[ax];
                        if (dist2 >= R2) continue;
                        const double hs = hs_factor(sol.geom, s, a * a - b * b);
                        density = hs * (grad[off] * grad[off] + grad[off + 1] * grad[off + 1]);
                        if (D == 3) density += 4.0 * (a * a + b * b) * grad[0] * grad[0] / hs;
                    }
                    rep.gradient_part += 2.0 * density * vol;
                }
            }

    // plate part: measure of {u > 0} on the plane, by sub-sampling the interpolant
    constexpr int kSub = 8;
    const int n1 = sh[0] - 1, n2 = D == 3 ? sh[1] - 1 : 1;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            std::array<double, 4> cv{};
            bool ok = true;
            for (int c = 0; c < (D == 3 ? 4 : 2); ++c) {
                const int di = c & 1, dj = (c >> 1) & 1;
                const std::size_t idx = D == 3 ? sol.index(i + di, j + dj, 0) : sol.index(i + di, 0, 0);
                cv[c] = sol.values[idx];
                if (!std::isfinite(cv[c])) ok = false;
            }
            if (!ok) continue;
            for (int p = 0; p < kSub; ++p)
                for (int q = 0; q < (D == 3 ? kSub : 1); ++q) {
                    const double tp = (p + 0.5) / kSub, tq = (q + 0.5) / kSub;
                    double u;
                    if (D == 3) u = (1 - tp) * (1 - tq) * cv[0] + tp * (1 - tq) * cv[1] + (1 - tp) * tq * cv[2] + tp * tq * cv[3];
                    else u = (1 - tp) * cv[0] + tp * cv[1];
                    if (!(u > 0.0)) continue;
                    double weight;
                    std::array<double, 3> X{};
                    if (sol.spec.grading == Grading::Uniform) {
                        X[0] = sol.coord(0, i) + tp * sol.step[0];
                        if (D == 3) X[1] = sol.coord(1, j) + tq * sol.step[1];
                        weight = sol.step[0] / kSub * (D == 3 ? sol.step[1] / kSub : 1.0);
                    } else {
                        // (s, a) on b = 0: d = a^2, area element h_s * 2a da ds
                        const double s = D == 3 ? sol.coord(0, i) + tp * sol.step[0] : 0.0;
                        const double a = D == 3 ? sol.coord(1, j) + tq * sol.step[1] : sol.coord(0, i) + tp * sol.step[0];
                        const Frame f = frame_from_coordinates(sol.geom, s, a * a, 0.0);
                        X = f.X;
                        weight = 2.0 * a * hs_factor(sol.geom, s, a * a) * (D == 3 ? sol.step[0] * sol.step[1] : sol.step[0]) /
                                 (D == 3 ? kSub * kSub : kSub);
                    }
                    double dist2 = 0.0;
                    for (int ax = 0; ax < D - 1; ++ax) dist2 += X[ax] * X[ax];
                    if (dist2 >= R2) continue;
                    rep.plate_part += 0.5 * M_PI * weight;
                }
        }
    return rep;
}

double GridSolution::evaluate(std::span<const double> X) const {
    std::array<double, 3> g{};
    if (spec.grading == Grading::Uniform) {
        for (int ax = 0; ax < dims; ++ax) g[ax] = X[ax];
        g[dims - 1] = std::abs(X[dims - 1]);
    } else {
        const SlitGeometry open = unbounded(geom);
        std::array<double, 3> P{};
        for (int ax = 0; ax < dims; ++ax) P[ax] = X[ax];
        P[dims - 1] = std::abs(P[dims - 1]);
        const Frame f = closest_point_frame(open, std::span<const double>(P.data(), dims));
        const std::complex<double> zeta = std::sqrt(std::complex<double>(f.d, f.y()));
        const int off = dims == 3 ? 1 : 0;
        if (dims == 3) g[0] = f.s;
        g[off] = std::abs(zeta.real());
        g[off + 1] = std::abs(zeta.imag());
    }
    std::array<int, 3> base{};
    std::array<double, 3> t{};
    for (int ax = 0; ax < dims; ++ax) {
        const double u = (g[ax] - lo[ax]) / step[ax];
        if (u < -1e-9 || u > shape[ax] - 1 + 1e-9) throw OutOfDomain("point outside the grid");
        base[ax] = std::clamp(static_cast<int>(std::floor(u)), 0, shape[ax] - 2);
        t[ax] = std::clamp(u - base[ax], 0.0, 1.0);
    }
    double sum = 0.0;
    for (int c = 0; c < (1 << dims); ++c) {
        std::array<int, 3> nb = base;
        double w = 1.0;
        for (int ax = 0; ax < dims; ++ax) {
            const int bit = (c >> ax) & 1;
            nb[ax] += bit;
            w *= bit ? t[ax] : 1.0 - t[ax];
        }
        if (w == 0.0) continue;
        const double v = values[index(nb[0], nb[1], nb[2])];
        if (!std::isfinite(v)) throw OutOfDomain("interpolation cell leaves the domain");
        sum += w * v;
    }
    return sum;
}

std::string grid_header(const GridSolution& sol) {
    std::ostringstream os;
    os.precision(17);
    os << sol.geom.n << ',' << sol.spec.h << ',';
    for (int ax = 0; ax < sol.dims; ++ax) os << (ax ? "x" : "") << sol.shape[ax];
    os << ',' << to_string(sol.spec.grading);
    if (sol.spec.grading == Grading::Sqrt) {
        os << "(";
        for (int ax = 0; ax < sol.dims; ++ax) os << (ax ? " " : "") << sol.lo[ax] << ':' << sol.step[ax];
        os << ")";
    } else {
        os << "(lo";
        for (int ax = 0; ax < sol.dims; ++ax) os << ' ' << sol.lo[ax];
        os << ")";
    }
    return os.str();
}

void write_grid_csv(const GridSolution& sol, std::ostream& out) {
    out << grid_header(sol) << '\n';
    out.precision(17);
    const int last = sol.shape[sol.dims - 1];
    for (std::size_t idx = 0; idx < sol.size(); ++idx) {
        out << sol.values[idx];
        out << ((idx + 1) % last == 0 ? '\n' : ',');
    }
}

void write_grid_binary(const GridSolution& sol, std::ostream& out) {
    out << grid_header(sol) << '\n';
    for (double v : sol.values) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
        out.write(bytes, 8);
    }
}

}  // namespace slitkit
