#pragma once

#include "structmap/fbe/explorer.hpp"
#include "structmap/io/run_io.hpp"
#include "structmap/metrics/metrics.hpp"
#include "structmap/planner/cavity.hpp"

#include <memory>

namespace structmap {

/// Everything one run produces, ready to be written or asserted on.
struct RunArtifacts {
    Scenario scenario;
    std::string policy;  // proposed | fbe
    std::unique_ptr<RunState> state;
    PeResult pe;
    CeResult ce;
    FbeResult fbe;
    MetricsReport metrics;
    int exit_code = 0;  // 0 ok, 2 scenario violation, 3 tick cap
    std::string failure;
};

/// Runs the selected policy end to end (perimeter + cavity phases, or the
/// frontier baseline) and evaluates the metrics.
RunArtifacts run_policy(const Scenario& scenario, const std::string& policy);

/// Writes trajectory.csv, model.ply, octree_leaves.csv, frontiers.csv,
/// entrances.json and metrics.json into out_dir (created if needed).
void write_artifacts(const RunArtifacts& artifacts, const std::string& out_dir);

}  // namespace structmap
