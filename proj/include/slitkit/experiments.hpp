#pragma once

#include <string>
#include <vector>

#include "slitkit/config.hpp"
#include "slitkit/freeboundary.hpp"
#include "slitkit/geometry.hpp"
#include "slitkit/solver.hpp"

namespace slitkit {

/// One pass/fail line of a run. `criterion` tags the acceptance criterion the
/// check belongs to (0: none); informational checks never fail a run.
struct CheckResult {
    int criterion = 0;
    std::string name;
    bool passed = false;
    bool informational = false;
    std::string measured;
};

struct ReportFile {
    std::string name;
    std::string content;
};

struct ExperimentReport {
    std::string kind;
    std::vector<CheckResult> checks;
    std::vector<ReportFile> files;     // in write order
    double seconds = 0.0;              // wall time, kept out of the report files

    bool passed() const;
    /// criterion,name,passed,informational,measured
    std::string checks_csv() const;
};

/// Geometry, boundary data and tip data described by a config.
SlitGeometry config_geometry(const ExperimentConfig& config);
FieldSpec config_phi(const ExperimentConfig& config);
AngleFunction config_angle_data(const ExperimentConfig& config);

ExperimentReport run_solve(const ExperimentConfig& config);
ExperimentReport run_expand(const ExperimentConfig& config);
ExperimentReport run_rates(const ExperimentConfig& config);
ExperimentReport run_whitney(const ExperimentConfig& config);
ExperimentReport run_neumann(const ExperimentConfig& config);
ExperimentReport run_freeboundary(const ExperimentConfig& config);
ExperimentReport run_barrier(const ExperimentConfig& config);
ExperimentReport run_energy(const ExperimentConfig& config);

/// Dispatches on config.kind() after validate().
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace slitkit
