#pragma once

#include "structmap/geometry/types.hpp"

namespace structmap {

struct IcpResult {
    RigidTransform transform;  // maps source into the target frame
    bool converged = false;
    bool degenerate = false;   // correspondences did not constrain rotation
    int iterations = 0;
    double mean_distance = 0.0;
};

/// Point-to-point ICP: iterate nearest-neighbor correspondences and the SVD
/// least-squares rigid fit until the mean correspondence distance changes by
/// less than convergence_tol or max_iters is hit. No correspondence
/// rejection, so the initial misalignment must be small (about a meter and
/// 15 degrees of rotation); larger offsets may converge to the wrong basin.
IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       int max_iters = 60, double convergence_tol = 1e-7);

/// Least-squares rigid transform between paired points (cross-covariance SVD).
/// Sets *degenerate when the pairing leaves rotation unconstrained.
RigidTransform rigid_fit(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                         bool* degenerate = nullptr);

}  // namespace structmap
