#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slitkit/config.hpp"
#include "slitkit/errors.hpp"
#include "slitkit/experiments.hpp"
#include "slitkit/freeboundary.hpp"
#include "slitkit/geometry.hpp"
#include "slitkit/polynomial.hpp"
#include "slitkit/rational.hpp"
#include "slitkit/solver.hpp"
#include "slitkit/version.hpp"

namespace py = pybind11;
using namespace slitkit;

namespace {

py::dict report_to_dict(const ExperimentReport& rep) {
    py::list checks;
    for (const auto& c : rep.checks) {
        py::dict d;
        d["criterion"] = c.criterion;
        d["name"] = c.name;
        d["passed"] = c.passed;
        d["informational"] = c.informational;
        d["measured"] = c.measured;
        checks.append(d);
    }
    py::dict files;
    for (const auto& f : rep.files) files[py::str(f.name)] = f.content;
    py::dict out;
    out["kind"] = rep.kind;
    out["passed"] = rep.passed();
    out["seconds"] = rep.seconds;
    out["checks"] = checks;
    out["files"] = files;
    out["checks_csv"] = rep.checks_csv();
    return out;
}

ExperimentConfig make_config(const std::string& kind, const std::map<std::string, std::string>& overrides) {
    ExperimentConfig c = ExperimentConfig::defaults(kind);
    for (const auto& [k, v] : overrides) c.set(k, v);
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_slitkit, m) {
    m.doc() = "Slit-domain expansions, grid solvers and free boundary runs";
    m.attr("__version__") = kVersion;

    static py::exception<Error> base(m, "SlitkitError", PyExc_RuntimeError);
    static py::exception<ConfigInvalid> config_invalid(m, "ConfigInvalid", base.ptr());
    static py::exception<NoBracket> no_bracket(m, "NoBracket", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigInvalid& e) {
            PyErr_SetString(config_invalid.ptr(), e.what());
        } catch (const NoBracket& e) {
            PyErr_SetString(no_bracket.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(base.ptr(), e.what());
        }
    });

    m.def("experiment_kinds", &experiment_kinds);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_static("defaults", &ExperimentConfig::defaults, py::arg("kind"))
        .def_static("parse", [](const std::string& text) { return ExperimentConfig::parse(text); }, py::arg("text"))
        .def("serialize", &ExperimentConfig::serialize)
        .def("set", &ExperimentConfig::set, py::arg("key"), py::arg("value"))
        .def("raw", &ExperimentConfig::raw, py::arg("key"))
        .def("validate", &ExperimentConfig::validate)
        .def_property_readonly("kind", &ExperimentConfig::kind)
        .def("hash_hex", &ExperimentConfig::hash_hex)
        .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; })
        .def("__repr__", [](const ExperimentConfig& c) { return "<ExperimentConfig kind=" + c.kind() + ">"; });

    m.def("run_experiment",
          [](const ExperimentConfig& config) {
              ExperimentReport rep;
              {
                  py::gil_scoped_release release;
                  rep = run_experiment(config);
              }
              return report_to_dict(rep);
          },
          py::arg("config"), "Run a configured experiment; returns checks and report files.");
    m.def("run",
          [](const std::string& kind, const std::map<std::string, std::string>& overrides) {
              const ExperimentConfig c = make_config(kind, overrides);
              ExperimentReport rep;
              {
                  py::gil_scoped_release release;
                  rep = run_experiment(c);
              }
              return report_to_dict(rep);
          },
          py::arg("kind"), py::arg("overrides") = std::map<std::string, std::string>{},
          "Run an experiment from its defaults plus string overrides.");

    m.def("mobius_factor", &mobius_factor, py::arg("gamma"));
    m.def("tip_coefficient",
          [](double gamma, const std::function<double(double)>& phi, int terms) {
              return tip_coefficient(gamma, phi, terms);
          },
          py::arg("gamma"), py::arg("phi"), py::arg("terms") = 64,
          "Coefficient of U0 at the tip of the disc slit along x1 <= gamma.");
    m.def("fd_tip_coefficient",
          [](double gamma, const std::function<double(double)>& phi, double h) {
              return fd_tip_coefficient(gamma, phi, h);
          },
          py::arg("gamma"), py::arg("phi"), py::arg("h"));
    m.def("solve_series_2d",
          [](const std::function<double(double)>& phi, int terms, double tolerance) {
              return solve_series_2d(phi, terms, tolerance).c;
          },
          py::arg("phi"), py::arg("terms"), py::arg("tolerance") = 1e-12,
          "Coefficients c_j of r^(j+1/2) cos((j+1/2) theta).");
    m.def("solve_free_boundary",
          [](const std::function<double(double)>& phi, const std::function<double(double)>& G, double lo, double hi,
             int scan_points) {
              TipProblem p;
              p.phi = phi;
              p.G = G;
              p.lo = lo;
              p.hi = hi;
              p.scan_points = scan_points;
              const FreeBoundaryResult r = solve_free_boundary(p);
              py::dict d;
              d["gamma"] = r.gamma;
              d["a"] = r.a;
              d["residual"] = r.residual;
              d["roots"] = r.roots;
              d["multiple_roots"] = r.multiple_roots;
              d["expansion"] = r.expansion;
              d["iterations"] = r.iterations;
              return d;
          },
          py::arg("phi"), py::arg("G"), py::arg("lo") = -0.5, py::arg("hi") = 0.5, py::arg("scan_points") = 33);

    m.def("u0",
          [](const std::vector<double>& X, const std::vector<std::string>& g) {
              SlitGeometry geom = SlitGeometry::flat(static_cast<int>(X.size()) - 1);
              if (!g.empty()) {
                  std::vector<Rational> coeffs;
                  for (const auto& s : g) coeffs.push_back(parse_rational(s));
                  geom = SlitGeometry::graph(Polynomial1D(coeffs));
              }
              const Frame f = closest_point_frame(geom, X);
              py::dict d;
              d["u0"] = f.u0;
              d["r"] = f.r;
              d["d"] = f.d;
              d["theta"] = f.theta;
              return d;
          },
          py::arg("X"), py::arg("g") = std::vector<std::string>{},
          "Singular frame of X for the flat slit, or for the graph of g (ascending rational coefficients).");
}
