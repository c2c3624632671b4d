#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "slitkit/geometry.hpp"

namespace slitkit {

/// u(r, theta) = sum_j c_j r^{q_j} cos(q_j theta) with q_j = j + 1/2.
struct HalfAngleSeries {
    std::vector<double> c;
    double tolerance = 1e-12;
    /// False when the last coefficient exceeds the tolerance (truncation warning).
    bool resolved = true;
    std::string warning;

    static double q(int j) { return j + 0.5; }
    int size() const { return static_cast<int>(c.size()); }
    /// Coefficient of r^{1/2} cos(theta/2).
    double leading() const { return c.empty() ? 0.0 : c[0]; }

    double operator()(double r, double theta) const;
    /// Cartesian evaluation on the flat n = 1 slit plane (slit = negative x1-axis).
    double at(double x1, double x2) const;
    /// (du/dx1, du/dx2).
    std::array<double, 2> gradient(double x1, double x2) const;
    /// sum_{j >= N} |c_{N-1}| rho^{q_j}: crude bound from the last retained term.
    double tail_bound(double rho) const;
};

/// Coefficients (1/pi) int phi(theta) cos(q theta) by adaptive quadrature.
/// Throws SeriesUnresolved if the quadrature misses the tolerance.
HalfAngleSeries solve_series_2d(const std::function<double(double)>& phi, int N,
                                double tolerance = 1e-12);

/// Scalar field evaluated from the singular frame of a point.
using PointFunction = std::function<double(const Frame&)>;

struct FieldSpec {
    std::string descriptor;
    PointFunction fn;
    double operator()(const Frame& f) const { return fn ? fn(f) : 0.0; }
};

enum class Grading { Uniform, Sqrt };
enum class DomainShape { Box, Ball };

std::string to_string(Grading g);
Grading grading_from_string(const std::string& s);

struct GridSpec {
    Grading grading = Grading::Uniform;
    DomainShape shape = DomainShape::Ball;  // uniform grids only
    double h = 1.0 / 64;                    // uniform spacing, or spacing in (a, b)
    double radius = 1.0;                    // ball radius
    double center = 0.0;                    // ball center on the x_n axis
    double half_width = 1.0;                // box: |x_i| <= half_width, 0 <= y <= height
    double height = 1.0;
    // sqrt grading: s in [-s_extent, s_extent], a in [0, a_max], b in [0, b_max]
    double s_extent = 0.6;
    double a_max = 0.8;
    double b_max = 0.8;
    double hs = 0.0;                        // 0 selects h * s_extent / a_max
    bool splitting = false;
    int splitting_iterations = 4;
    double tolerance = 1e-11;
    int max_iterations = 100000;
};

enum class NodeKind : std::uint8_t { Unknown = 0, Slit = 1, Boundary = 2, Outside = 3 };

/// Discrete solution on the half-space x_{n+1} >= 0 (even reflection implied).
/// Uniform grids index (x_1[, x_2], y); sqrt grids index ([s,] a, b) with
/// d + i y = (a + i b)^2 and s the closest-point parameter.
struct GridSolution {
    SlitGeometry geom;
    GridSpec spec;
    int dims = 2;                       // n + 1
    std::array<int, 3> shape{1, 1, 1};  // nodes per axis
    std::array<double, 3> lo{};
    std::array<double, 3> step{};
    std::vector<double> values;
    std::vector<NodeKind> kind;
    std::string boundary_descriptor;
    std::string rhs_descriptor;
    double splitting_coefficient = 0.0;
    int iterations = 0;
    double residual = 0.0;

    std::size_t size() const { return values.size(); }
    std::size_t index(int i, int j, int l = 0) const;
    std::array<int, 3> multi_index(std::size_t idx) const;
    /// Grid coordinate of axis `axis` at index i.
    double coord(int axis, int i) const { return lo[axis] + i * step[axis]; }
    /// Frame of a node (no domain check).
    Frame node_frame(std::size_t idx) const;
    /// Physical point of a node, length n + 1.
    std::array<double, 3> node_point(std::size_t idx) const;
    /// Multilinear interpolation at a physical point; uses |x_{n+1}|, so the
    /// result is even in the last coordinate by construction.
    double evaluate(std::span<const double> X) const;
};

/// Solves Delta u = (U0 / r) f in the slit domain with Dirichlet data phi on
/// the outer boundary, 0 on the slit and even reflection across x_{n+1} = 0.
GridSolution solve_fd(const SlitGeometry& geom, const FieldSpec& phi, const FieldSpec& f,
                      const GridSpec& grid);

/// A GridSolution whose node values are fn sampled on the grid (no solve).
GridSolution sample_on_grid(const SlitGeometry& geom, const FieldSpec& fn, const GridSpec& grid);

/// Discrete Laplacian (in the solver's own stencil) of nodal values at a node
/// whose neighbours are all inside the grid; NaN otherwise.
double discrete_laplacian(const GridSolution& sol, std::size_t idx);

/// min over off-slit nodes (r > 0, not on the outer boundary) of
/// r * Delta_h(-U0 + U0^2).
struct BarrierReport {
    double min_value = 0.0;
    std::array<double, 3> argmin{};
    std::size_t nodes = 0;
};
BarrierReport check_barrier(const SlitGeometry& geom, const GridSpec& grid);

/// Dirichlet energy of the reflected field plus (pi/2) |{u > 0} on x_{n+1} = 0|,
/// restricted to the ball of radius `radius` about the origin.
struct EnergyReport {
    double gradient_part = 0.0;
    double plate_part = 0.0;
    double total() const { return gradient_part + plate_part; }
};
EnergyReport compute_energy(const GridSolution& sol, double radius = 1.0);

/// Length element h_s = J - g'' d / J^2 along the closest-point parameter s
/// at signed distance d (1 for flat or n = 1 geometries).
double metric_factor(const SlitGeometry& geom, double s, double d);

/// Radius of the core around Gamma not resolved by the grid: 4h on uniform
/// grids, (4h)^2 on sqrt-graded ones (4 cells in the a-coordinate).
double core_radius(const GridSolution& sol);

/// Smooth cutoff: 1 on [0, 1/8], 0 beyond 1/4; returns {chi, chi', chi''}.
std::array<double, 3> cutoff(double r);

void write_grid_csv(const GridSolution& sol, std::ostream& out);
void write_grid_binary(const GridSolution& sol, std::ostream& out);
/// Header line shared by both formats: `n,h,dims,grading`.
std::string grid_header(const GridSolution& sol);

}  // namespace slitkit
