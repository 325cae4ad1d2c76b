#pragma once

#include "structmap/geometry/kdtree.hpp"
#include "structmap/geometry/types.hpp"

#include <optional>
#include <span>

namespace structmap {

/// Parameters of the potential field
///   N(x) = alpha*|x-g|^2 + sum_j I_j(x) / (beta*|x-x_j|),
/// where I_j limits each occupied cell's repulsion to a disc of
/// repulse_radius around it (D during perimeter following, delta inside
/// cavities).
struct PotentialParams {
    double alpha = 1.0;
    double beta = 0.05;
    double repulse_radius = 3.0;
    double step = 0.1;        // descent step, one cost-map cell
    int iter_cap_factor = 10; // cap = factor * (2*rho / step)
    double rho = 4.5;
};

/// Planar grid of occupied cells around the camera. Cells hold the centers of
/// grid squares containing at least one projected structure point.
class LocalCostMap {
public:
    LocalCostMap() = default;

    /// Projects structure points (0 < z <= h_max) from the given global-frame
    /// clouds onto the plane and marks cells within the 2*half_extent square
    /// around center.
    static LocalCostMap build(const Vec3& center, std::span<const PointCloud> clouds_global,
                              double half_extent, double cell, double h_max);

    static LocalCostMap from_cells(const Vec2& center, double cell, double half_extent,
                                   std::vector<Vec2> occupied_centers);

    const std::vector<Vec2>& occupied_centers() const { return centers_; }
    double cell() const { return cell_; }
    double half_extent() const { return half_extent_; }
    const Vec2& center() const { return center_; }
    bool inside(const Vec2& p) const {
        return std::abs(p.x() - center_.x()) <= half_extent_ &&
               std::abs(p.y() - center_.y()) <= half_extent_;
    }

    /// Indices of occupied cells within radius of x, ascending.
    std::vector<int> within(const Vec2& x, double radius) const;
    std::optional<Vec2> nearest_occupied(const Vec2& x) const;
    double clearance(const Vec2& x) const;  // +inf when empty

private:
    Vec2 center_ = Vec2::Zero();
    double cell_ = 0.1;
    double half_extent_ = 0.0;
    std::vector<Vec2> centers_;
    KdTree tree_;  // cell centers lifted to z=0
};

double potential_value(const Vec2& x, const Vec2& goal, const LocalCostMap& map,
                       const PotentialParams& params);

struct GradientResult {
    Vec2 neg_grad = Vec2::Zero();
    bool clamped = false;  // some obstacle closer than half a cell
};

/// Negative gradient: 2*alpha*(g-x) + sum_{j in J_x} (x-x_j)/(beta*|x-x_j|^3).
GradientResult potential_gradient(const Vec2& x, const Vec2& goal, const LocalCostMap& map,
                                  const PotentialParams& params);

/// Camera goal in structure-relative form so the stand-off distance can be
/// re-evaluated: point(d) = p_bar - d*n + step_len*r.
struct GoalSpec {
    Vec3 p_bar = Vec3::Zero();
    Vec3 n = Vec3::UnitX();
    Vec3 r = Vec3::UnitY();
    double step_len = 0.0;
    double distance = 3.0;

    Vec3 point() const { return point_at(distance); }
    Vec3 point_at(double d) const { return p_bar - d * n + step_len * r; }
    Vec2 point2() const { return point().head<2>(); }
};

enum class PathStatus { Reached, Stuck, IterationCap };

struct LocalPath {
    std::vector<Vec2> polyline;
    Vec2 goal = Vec2::Zero();
    double used_distance = 0.0;  // possibly shrunk stand-off D'
    PathStatus status = PathStatus::Reached;
    bool goal_adjusted = false;
};

/// Normalized gradient descent from start. When the goal direction points
/// away from the structure side at the start (the path would leave the
/// boundary band), the stand-off distance is shrunk (0.8*D then halving, not
/// below one cell) until it does not.
LocalPath plan_local_path(const Vec2& start, const GoalSpec& goal, const LocalCostMap& map,
                          const PotentialParams& params);

/// Same descent towards a fixed point (no stand-off adjustment).
LocalPath plan_to_point(const Vec2& start, const Vec2& goal, const LocalCostMap& map,
                        const PotentialParams& params);

}  // namespace structmap
