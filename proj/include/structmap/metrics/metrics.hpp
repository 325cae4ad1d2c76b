#pragma once

#include "structmap/geometry/icp.hpp"
#include "structmap/planner/engine.hpp"
#include "structmap/world/structure.hpp"

#include <span>

namespace structmap {

struct ErrorStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double max = 0.0;
    bool icp_converged = true;
};

/// Deterministic reference point cloud: every wall face reachable from
/// outside the structure, sampled on a 0.1 m grid up to h_max. Horizontal
/// (top) faces are excluded since a level camera can never map them, and
/// faces sealed inside closed wall loops are excluded by a reachability
/// flood fill.
PointCloud reference_cloud(const StructureModel& structure, const CameraModel& cam,
                           double spacing = 0.1);

/// Registers the reconstruction onto the reference with ICP, then reports the
/// per-point nearest-neighbor distance statistics. aligned_out (when given)
/// receives the registered cloud for coverage computations.
ErrorStats reconstruction_error(const PointCloud& reconstruction, const PointCloud& reference,
                                PointCloud* aligned_out = nullptr);

/// Number of distinct reference points that are nearest neighbors of the
/// (already aligned) reconstruction; the coverage estimate.
int unique_coverage(const PointCloud& aligned, const PointCloud& reference);

double path_length(std::span<const TrajectoryRow> trajectory);

struct MetricsReport {
    std::string scenario;
    std::string policy;
    double k = 0.0;
    std::uint64_t seed = 1;
    double path_length_m = 0.0;
    int coverage = 0;
    int reference_size = 0;
    double mu_m = 0.0;
    double sigma_m = 0.0;
    double max_m = 0.0;
    int n_points = 0;
    double runtime_s = 0.0;
    bool icp_converged = true;
    std::string status;
};

/// Full evaluation of one run: ground and above-h_max points are discarded
/// from the reconstruction before registration.
MetricsReport compute_metrics(const Scenario& scenario, const std::string& policy,
                              const World& world, const RunState& state,
                              const std::string& status, double runtime_s);

}  // namespace structmap
