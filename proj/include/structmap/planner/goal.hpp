#pragma once

#include "structmap/geometry/types.hpp"

namespace structmap {

struct EmptyAfterGroundRemoval : Error {
    using Error::Error;
};
struct DegenerateSlice : Error {
    using Error::Error;
};

/// Next-goal computation result, camera frame. n is the desired optical-axis
/// direction (horizontal unit vector), r = z x n the along-structure travel
/// direction, goal = p_bar - D*n + step_len*r.
struct CameraGoal {
    Vec3 goal = Vec3::Zero();
    Vec3 n = Vec3::UnitX();
    Vec3 r = Vec3::UnitY();
    Vec3 p_bar = Vec3::Zero();
    double step_len = 0.0;
};

/// Computes the next camera goal from the current depth cloud:
///  1. drop ground points (global z below ground_eps),
///  2. keep the forward slice: the slice_fraction of the cloud with the
///     largest camera-frame y,
///  3. fit a plane to the slice by PCA,
///  4. project its normal onto the horizontal camera plane, sign it toward
///     the slice centroid and step the goal sideways by a sixth of the
///     cloud's y-extent so upcoming corners stay in view.
///
/// Throws EmptyAfterGroundRemoval when no structure is in view and
/// DegenerateSlice when the slice cannot support a plane fit (callers retry
/// once with slice_fraction = 1/2).
CameraGoal compute_next_goal(const PointCloud& cloud_camera, double distance,
                             double camera_height, double ground_eps,
                             double slice_fraction = 1.0 / 3.0);

}  // namespace structmap
