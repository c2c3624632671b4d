#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "slitkit/errors.hpp"
#include "slitkit/solver.hpp"

using namespace slitkit;

namespace {

const FieldSpec kZero{"0", nullptr};
const FieldSpec kU0{"U0", [](const Frame& f) { return f.u0; }};

// (1/pi) int phi cos(q theta) by a plain midpoint sum.
double riemann_coefficient(const std::function<double(double)>& phi, double q, int samples) {
    double sum = 0.0;
    const double dt = 2.0 * M_PI / samples;
    for (int i = 0; i < samples; ++i) {
        const double t = -M_PI + (i + 0.5) * dt;
        sum += phi(t) * std::cos(q * t);
    }
    return sum * dt / M_PI;
}

double sup_error_in_ball(const GridSolution& sol, double radius, const std::function<double(const Frame&)>& exact) {
    double err = 0.0;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        if (sol.kind[i] == NodeKind::Outside) continue;
        const Frame f = sol.node_frame(i);
        double norm2 = 0.0;
        for (int a = 0; a < sol.dims; ++a) norm2 += f.X[a] * f.X[a];
        if (norm2 > radius * radius) continue;
        err = std::max(err, std::abs(sol.values[i] - exact(f)));
    }
    return err;
}

GridSpec uniform(double h) {
    GridSpec g;
    g.h = h;
    return g;
}

GridSpec graded(double h) {
    GridSpec g;
    g.grading = Grading::Sqrt;
    g.h = h;
    return g;
}

SlitGeometry parabola() { return SlitGeometry::graph(Polynomial1D({0, 0, Rational(1, 4)}), 1.0, 0); }

}  // namespace

TEST_CASE("series of the tip profile is a single term") {
    const auto s = solve_series_2d([](double t) { return std::cos(0.5 * t); }, 8);
    CHECK(s.c[0] == doctest::Approx(1.0).epsilon(1e-13));
    for (int j = 1; j < s.size(); ++j) CHECK(std::abs(s.c[j]) < 1e-13);
    CHECK(s.resolved);
    CHECK(s.at(0.25, 0.0) == doctest::Approx(0.5));
    CHECK(s.at(-0.25, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("three-halves series matches the product form") {
    const auto s = solve_series_2d([](double t) { return std::cos(1.5 * t); }, 6);
    CHECK(s.c[1] == doctest::Approx(1.0).epsilon(1e-13));
    for (double x1 : {-0.4, 0.1, 0.3})
        for (double x2 : {0.05, 0.2, -0.3}) {
            const double r = std::hypot(x1, x2);
            const double expected = oracle::flat_u0(x1, x2) * (2 * x1 - r);
            CHECK(s.at(x1, x2) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("tent profile coefficients agree with a fine Riemann sum") {
    auto tent = [](double t) { return 1.0 - std::abs(t) / M_PI; };
    const auto s = solve_series_2d(tent, 12);
    for (int j = 0; j < s.size(); ++j)
        CHECK(s.c[j] == doctest::Approx(riemann_coefficient(tent, j + 0.5, 1000000)).epsilon(1e-9).scale(1e-9));
    // 1/q^2 decay leaves the last coefficient far above 1e-12
    CHECK_FALSE(s.resolved);
    CHECK(s.warning.find("TruncationWarning") != std::string::npos);
}

TEST_CASE("series gradient matches finite differences and tail bound is finite") {
    const auto s = solve_series_2d([](double t) { return std::cos(0.5 * t) + 0.3 * std::cos(2.5 * t); }, 6);
    const double x1 = 0.2, x2 = 0.3, e = 1e-6;
    const auto g = s.gradient(x1, x2);
    CHECK(g[0] == doctest::Approx((s.at(x1 + e, x2) - s.at(x1 - e, x2)) / (2 * e)).epsilon(1e-6));
    CHECK(g[1] == doctest::Approx((s.at(x1, x2 + e) - s.at(x1, x2 - e)) / (2 * e)).epsilon(1e-6));
    CHECK(std::isfinite(s.tail_bound(0.5)));
    CHECK(s.tail_bound(0.5) < 1e-12);
}

TEST_CASE("series input validation") {
    CHECK_THROWS_AS(solve_series_2d([](double t) { return std::cos(0.5 * t); }, 0), std::invalid_argument);
}

TEST_CASE("cutoff is smooth and supported in r <= 1/4") {
    CHECK(cutoff(0.0)[0] == 1.0);
    CHECK(cutoff(0.3)[0] == 0.0);
    for (double r = 0.13; r < 0.25; r += 0.01) {
        const double e = 1e-6;
        CHECK(cutoff(r)[1] == doctest::Approx((cutoff(r + e)[0] - cutoff(r - e)[0]) / (2 * e)).epsilon(1e-5));
        CHECK(cutoff(r)[2] == doctest::Approx((cutoff(r + e)[1] - cutoff(r - e)[1]) / (2 * e)).epsilon(1e-4));
    }
}

TEST_CASE("plain finite differences converge to U0 at the half rate") {
    const auto geom = SlitGeometry::flat(1);
    std::vector<double> hs, errs;
    for (int e = 4; e <= 7; ++e) {
        const double h = std::ldexp(1.0, -e);
        const auto sol = solve_fd(geom, kU0, kZero, uniform(h));
        CHECK(sol.residual < 1e-11);
        hs.push_back(h);
        errs.push_back(sup_error_in_ball(sol, 0.5, [](const Frame& f) { return f.u0; }));
    }
    CHECK(oracle::loglog_slope(hs, errs) == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("singularity splitting restores near second order") {
    const auto geom = SlitGeometry::flat(1);
    std::vector<double> hs, errs;
    for (int e = 5; e <= 7; ++e) {
        const double h = std::ldexp(1.0, -e);
        GridSpec g = uniform(h);
        g.splitting = true;
        const auto sol = solve_fd(geom, kU0, kZero, g);
        hs.push_back(h);
        errs.push_back(sup_error_in_ball(sol, 0.5, [](const Frame& f) { return f.u0; }));
        CHECK(sol.splitting_coefficient == doctest::Approx(1.0).epsilon(0.05));
    }
    CHECK(oracle::loglog_slope(hs, errs) > 1.5);
}

TEST_CASE("three-halves boundary data reproduces the closed form") {
    const auto geom = SlitGeometry::flat(1);
    const FieldSpec phi{"r^1.5 cos(1.5 theta)", [](const Frame& f) { return f.u0 * (2 * f.d - f.r); }};
    std::vector<double> hs, errs;
    for (int e = 4; e <= 6; ++e) {
        const double h = std::ldexp(1.0, -e);
        const auto sol = solve_fd(geom, phi, kZero, uniform(h));
        hs.push_back(h);
        errs.push_back(sup_error_in_ball(sol, 1.0, [](const Frame& f) {
            return std::pow(f.r, 1.5) * std::cos(1.5 * f.theta);
        }));
    }
    CHECK(errs.back() < 2e-3);
    CHECK(oracle::loglog_slope(hs, errs) > 0.9);
}

TEST_CASE("constant source agrees with the particular plus series composite") {
    // U0 r / 2 is a particular solution; the harmonic remainder has trace
    // -cos(theta/2)/2 on the unit circle and is found by the series solver.
    const auto series = solve_series_2d([](double t) { return -0.5 * std::cos(0.5 * t); }, 6);
    const auto geom = SlitGeometry::flat(1);
    const FieldSpec one{"1", [](const Frame&) { return 1.0; }};
    auto exact = [&](const Frame& f) { return 0.5 * f.u0 * f.r + series.at(f.X[0], f.X[1]); };
    std::vector<double> hs, errs;
    for (int e = 5; e <= 7; ++e) {
        const double h = std::ldexp(1.0, -e);
        GridSpec g = uniform(h);
        g.splitting = true;
        const auto sol = solve_fd(geom, kZero, one, g);
        hs.push_back(h);
        errs.push_back(sup_error_in_ball(sol, 0.5, exact));
    }
    CHECK(errs.back() < 5e-3);
    CHECK(oracle::loglog_slope(hs, errs) > 0.9);
}

TEST_CASE("graded grid represents U0 exactly on the flat slit") {
    for (int n = 1; n <= 2; ++n) {
        const auto geom = SlitGeometry::flat(n);
        const auto sol = solve_fd(geom, kU0, kZero, graded(n == 1 ? 1.0 / 32 : 1.0 / 8));
        for (std::size_t i = 0; i < sol.size(); ++i) CHECK(std::abs(sol.values[i] - sol.node_frame(i).u0) < 1e-9);
    }
}

TEST_CASE("graded solver self-converges at second order on a curved slit") {
    const auto geom = parabola();
    const std::array<std::array<double, 3>, 3> pts{{{0.1, 0.2, 0.1}, {-0.1, 0.1, 0.2}, {0.0, -0.2, 0.15}}};
    std::vector<std::array<double, 3>> vals;
    for (int cells : {8, 16, 32}) {
        const auto sol = solve_fd(geom, kU0, kZero, graded(0.8 / cells));
        std::array<double, 3> v{};
        for (int i = 0; i < 3; ++i) v[i] = sol.evaluate(std::span<const double>(pts[i].data(), 3));
        vals.push_back(v);
    }
    for (int i = 0; i < 3; ++i) {
        const double d1 = std::abs(vals[1][i] - vals[0][i]);
        const double d2 = std::abs(vals[2][i] - vals[1][i]);
        CHECK(d2 < d1 / 2.5);
    }
}

TEST_CASE("maximum principle and evenness") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
    const FieldSpec phi{"random", [=](const Frame& f) { return c1 + c2 * f.X[0] + c3 * f.X[1] * f.X[1]; }};
    for (int n = 1; n <= 2; ++n) {
        const auto geom = n == 1 ? SlitGeometry::flat(1) : parabola();
        const auto sol = solve_fd(geom, phi, kZero, uniform(n == 1 ? 1.0 / 32 : 1.0 / 12));
        // bounds of phi over the unit sphere, slit data is 0
        double lo = 0.0, hi = 0.0;
        for (int i = 0; i <= 400; ++i)
            for (int j = 0; j <= (n == 1 ? 0 : 400); ++j) {
                const double t = M_PI * i / 200.0, p = M_PI * j / 400.0;
                Frame f;
                f.X = n == 1 ? std::array<double, 3>{std::cos(t), std::sin(t), 0.0}
                             : std::array<double, 3>{std::cos(t) * std::sin(p), std::sin(t) * std::sin(p), std::cos(p)};
                lo = std::min(lo, phi(f));
                hi = std::max(hi, phi(f));
            }
        for (std::size_t i = 0; i < sol.size(); ++i)
            if (sol.kind[i] == NodeKind::Unknown) {
                CHECK(sol.values[i] >= lo - 1e-9);
                CHECK(sol.values[i] <= hi + 1e-9);
            }
        std::array<double, 3> X{0.13, 0.21, 0.17};
        auto Y = X;
        Y[n] = -Y[n];
        CHECK(sol.evaluate(std::span<const double>(X.data(), n + 1)) ==
              sol.evaluate(std::span<const double>(Y.data(), n + 1)));
    }
}

TEST_CASE("ratio to U0 stays bounded near the slit") {
    const auto geom = parabola();
    const FieldSpec phi{"U0 perturbed", [](const Frame& f) { return f.u0 * (1.0 + 0.1 * f.X[0]); }};
    const auto sol = solve_fd(geom, phi, kZero, graded(0.8 / 16));
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const Frame f = sol.node_frame(i);
        if (sol.kind[i] != NodeKind::Unknown || f.r >= 0.1 || f.u0 <= 0.0) continue;
        const double ratio = sol.values[i] / f.u0;
        CHECK(ratio > 0.1);
        CHECK(ratio < 10.0);
    }
}

TEST_CASE("barrier is positive and h-stable on the graded grid") {
    const auto flat = check_barrier(SlitGeometry::flat(1), graded(1.0 / 64));
    CHECK(flat.min_value >= 0.2);
    CHECK(flat.min_value == doctest::Approx(0.5).epsilon(1e-6));
    const auto flat3 = check_barrier(SlitGeometry::flat(2), graded(1.0 / 8));
    CHECK(flat3.min_value == doctest::Approx(0.5).epsilon(1e-6));
    const auto c1 = check_barrier(parabola(), graded(0.8 / 8));
    const auto c2 = check_barrier(parabola(), graded(0.8 / 16));
    CHECK(c1.min_value > 0.0);
    CHECK(c2.min_value > 0.0);
    CHECK(std::abs(c2.min_value - c1.min_value) < 0.1 * c1.min_value);
}

TEST_CASE("uniform-grid Laplacian of U0 is second order away from the tip") {
    const auto geom = SlitGeometry::flat(1);
    std::vector<double> hs, errs;
    for (int e = 5; e <= 7; ++e) {
        const double h = std::ldexp(1.0, -e);
        const auto s = sample_on_grid(geom, kU0, uniform(h));
        double worst = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const Frame f = s.node_frame(i);
            if (f.r < 0.25 || f.r > 0.75) continue;
            const double lap = discrete_laplacian(s, i);
            if (std::isfinite(lap)) worst = std::max(worst, std::abs(f.r * lap));
        }
        hs.push_back(h);
        errs.push_back(worst);
    }
    CHECK(oracle::loglog_slope(hs, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("energy of U0 on the unit disc") {
    // independent polar midpoint rule for the half-disc integral of |grad U0|^2 = 1/(4r)
    double polar = 0.0;
    constexpr int kR = 2000, kT = 16;
    for (int i = 0; i < kR; ++i)
        for (int j = 0; j < kT; ++j) {
            const double r = (i + 0.5) / kR;
            polar += 1.0 / (4.0 * r) * r * (1.0 / kR) * (M_PI / kT);
        }
    CHECK(2.0 * polar == doctest::Approx(M_PI / 2).epsilon(1e-12));

    const auto geom = SlitGeometry::flat(1);
    const auto s = sample_on_grid(geom, kU0, uniform(1.0 / 128));
    const auto E = compute_energy(s);
    CHECK(E.gradient_part == doctest::Approx(2.0 * polar).epsilon(0.01));
    CHECK(E.plate_part == doctest::Approx(M_PI / 2).epsilon(0.01));
    CHECK(E.total() == doctest::Approx(M_PI).epsilon(0.01));

    const auto zero = compute_energy(sample_on_grid(geom, kZero, uniform(1.0 / 64)));
    CHECK(zero.total() == 0.0);

    const auto twice = sample_on_grid(geom, FieldSpec{"2U0", [](const Frame& f) { return 2 * f.u0; }}, uniform(1.0 / 128));
    const auto E2 = compute_energy(twice);
    CHECK(E2.gradient_part == doctest::Approx(4 * E.gradient_part).epsilon(1e-12));
    CHECK(E2.plate_part == E.plate_part);

    GridSpec g = graded(1.0 / 64);
    g.a_max = g.b_max = 1.0;
    const auto Eg = compute_energy(sample_on_grid(geom, kU0, g));
    CHECK(Eg.total() == doctest::Approx(M_PI).epsilon(0.01));
}

TEST_CASE("serialization") {
    const auto geom = SlitGeometry::flat(1);
    const auto sol = sample_on_grid(geom, kU0, uniform(0.25));
    CHECK(grid_header(sol).rfind("1,0.25,", 0) == 0);
    CHECK(grid_header(sol).find("uniform") != std::string::npos);
    std::ostringstream csv;
    write_grid_csv(sol, csv);
    std::istringstream in(csv.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + sol.shape[0]);

    std::ostringstream bin;
    write_grid_binary(sol, bin);
    const std::string bytes = bin.str();
    const auto header_len = bytes.find('\n') + 1;
    REQUIRE(bytes.size() == header_len + 8 * sol.size());
    // first finite value round-trips through little-endian decoding
    for (std::size_t i = 0; i < sol.size(); ++i) {
        if (!std::isfinite(sol.values[i])) continue;
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[header_len + 8 * i + b])) << (8 * b);
        CHECK(std::bit_cast<double>(bits) == sol.values[i]);
        break;
    }
    CHECK(grading_from_string(to_string(Grading::Sqrt)) == Grading::Sqrt);
    CHECK_THROWS(grading_from_string("cubic"));
}

TEST_CASE("solver error paths") {
    const auto geom = SlitGeometry::flat(1);
    GridSpec away = uniform(1.0 / 16);
    away.center = 3.0;  // ball entirely on the plate side
    CHECK_THROWS_AS(solve_fd(geom, kU0, kZero, away), MaskDegenerate);
    GridSpec starved = uniform(1.0 / 16);
    starved.max_iterations = 2;
    CHECK_THROWS_AS(solve_fd(geom, kU0, kZero, starved), NonConvergence);
    const auto sol = sample_on_grid(geom, kU0, uniform(1.0 / 8));
    const std::array<double, 2> far{3.0, 0.0};
    CHECK_THROWS_AS(sol.evaluate(far), OutOfDomain);
}
