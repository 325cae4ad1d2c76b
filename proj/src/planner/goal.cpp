#include "structmap/planner/goal.hpp"

#include "structmap/geometry/pca.hpp"

#include <algorithm>

namespace structmap {

CameraGoal compute_next_goal(const PointCloud& cloud_camera, double distance,
                             double camera_height, double ground_eps, double slice_fraction) {
    cloud_camera.require_frame(FrameTag::Camera, "compute_next_goal");

    std::vector<Vec3> structure;
    structure.reserve(cloud_camera.size());
    for (const Vec3& p : cloud_camera.points) {
        if (p.z() + camera_height >= ground_eps) structure.push_back(p);
    }
    if (structure.empty()) {
        throw EmptyAfterGroundRemoval("compute_next_goal: no structure points in view");
    }

    double y_min = structure.front().y(), y_max = y_min;
    for (const Vec3& p : structure) {
        y_min = std::min(y_min, p.y());
        y_max = std::max(y_max, p.y());
    }
    const double y_lo = y_max - (y_max - y_min) * slice_fraction;

    std::vector<Vec3> slice;
    for (const Vec3& p : structure) {
        if (p.y() >= y_lo) slice.push_back(p);
    }

    PlaneFit fit;
    try {
        fit = pca_plane_fit(slice);
    } catch (const DegenerateCloud& e) {
        throw DegenerateSlice(e.what());
    }

    // Project the plane normal onto the horizontal camera plane and point it
    // from the camera toward the slice.
    Vec3 n_tilde(fit.normal().x(), fit.normal().y(), 0.0);
    if (n_tilde.norm() < 1e-9) {
        throw DegenerateSlice("compute_next_goal: slice plane is horizontal");
    }
    if (n_tilde.dot(fit.centroid) < 0.0) n_tilde = -n_tilde;

    CameraGoal out;
    out.n = n_tilde.normalized();
    out.r = Vec3::UnitZ().cross(out.n);
    out.p_bar = fit.centroid;
    out.step_len = (y_max - y_min) / 6.0;
    out.goal = out.p_bar - distance * out.n + out.step_len * out.r;
    return out;
}

}  // namespace structmap
