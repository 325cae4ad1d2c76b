#include "structmap/planner/potential.hpp"

#include <algorithm>
#include <set>

namespace structmap {

LocalCostMap LocalCostMap::build(const Vec3& center, std::span<const PointCloud> clouds_global,
                                 double half_extent, double cell, double h_max) {
    std::set<std::pair<int, int>> cells;
    const Vec2 origin(center.x() - half_extent, center.y() - half_extent);
    const int n = static_cast<int>(std::ceil(2.0 * half_extent / cell));
    for (const PointCloud& cloud : clouds_global) {
        cloud.require_frame(FrameTag::Global, "LocalCostMap::build");
        for (const Vec3& p : cloud.points) {
            if (p.z() <= 0.0 || p.z() > h_max) continue;
            const int ix = static_cast<int>(std::floor((p.x() - origin.x()) / cell));
            const int iy = static_cast<int>(std::floor((p.y() - origin.y()) / cell));
            if (ix < 0 || iy < 0 || ix >= n || iy >= n) continue;
            cells.insert({ix, iy});
        }
    }
    std::vector<Vec2> centers;
    centers.reserve(cells.size());
    for (const auto& [ix, iy] : cells) {
        centers.emplace_back(origin.x() + (ix + 0.5) * cell, origin.y() + (iy + 0.5) * cell);
    }
    return from_cells(center.head<2>(), cell, half_extent, std::move(centers));
}

LocalCostMap LocalCostMap::from_cells(const Vec2& center, double cell, double half_extent,
                                      std::vector<Vec2> occupied_centers) {
    LocalCostMap map;
    map.center_ = center;
    map.cell_ = cell;
    map.half_extent_ = half_extent;
    map.centers_ = std::move(occupied_centers);
    std::vector<Vec3> lifted;
    lifted.reserve(map.centers_.size());
    for (const auto& c : map.centers_) lifted.emplace_back(c.x(), c.y(), 0.0);
    map.tree_ = KdTree(std::move(lifted));
    return map;
}

std::vector<int> LocalCostMap::within(const Vec2& x, double radius) const {
    if (centers_.empty()) return {};
    return tree_.radius_search(Vec3(x.x(), x.y(), 0.0), radius);
}

std::optional<Vec2> LocalCostMap::nearest_occupied(const Vec2& x) const {
    if (centers_.empty()) return std::nullopt;
    return centers_[tree_.nearest(Vec3(x.x(), x.y(), 0.0)).first];
}

double LocalCostMap::clearance(const Vec2& x) const {
    if (centers_.empty()) return std::numeric_limits<double>::infinity();
    return tree_.nearest(Vec3(x.x(), x.y(), 0.0)).second;
}

double potential_value(const Vec2& x, const Vec2& goal, const LocalCostMap& map,
                       const PotentialParams& params) {
    double value = params.alpha * (x - goal).squaredNorm();
    for (int j : map.within(x, params.repulse_radius)) {
        const double dist = (x - map.occupied_centers()[j]).norm();
        value += 1.0 / (params.beta * std::max(dist, 0.5 * map.cell()));
    }
    return value;
}

GradientResult potential_gradient(const Vec2& x, const Vec2& goal, const LocalCostMap& map,
                                  const PotentialParams& params) {
    GradientResult out;
    out.neg_grad = 2.0 * params.alpha * (goal - x);
    for (int j : map.within(x, params.repulse_radius)) {
        const Vec2 away = x - map.occupied_centers()[j];
        double dist = away.norm();
        if (dist < 0.5 * map.cell()) {
            out.clamped = true;
            dist = 0.5 * map.cell();
        }
        out.neg_grad += away / (params.beta * dist * dist * dist);
    }
    return out;
}

namespace {

LocalPath descend(const Vec2& start, const Vec2& goal, const LocalCostMap& map,
                  const PotentialParams& params) {
    LocalPath path;
    path.goal = goal;
    path.polyline.push_back(start);

    const double h = params.step;
    const int cap = std::max(100, static_cast<int>(params.iter_cap_factor * 2.0 * params.rho / h));
    Vec2 x = start;
    for (int iter = 0; iter < cap; ++iter) {
        if ((x - goal).norm() < h) {
            path.status = PathStatus::Reached;
            return path;
        }
        const GradientResult g = potential_gradient(x, goal, map, params);
        const double mag = g.neg_grad.norm();
        if (mag < 1e-6) {
            path.status = PathStatus::Stuck;
            return path;
        }
        x += h * g.neg_grad / mag;
        path.polyline.push_back(x);
        // Oscillation across a repulsion valley makes no positional progress.
        if (path.polyline.size() > 24) {
            const Vec2& old = path.polyline[path.polyline.size() - 21];
            if ((x - old).norm() < 0.75 * h) {
                path.status = PathStatus::Stuck;
                return path;
            }
        }
    }
    path.status = PathStatus::IterationCap;
    return path;
}

}  // namespace

LocalPath plan_local_path(const Vec2& start, const GoalSpec& goal, const LocalCostMap& map,
                          const PotentialParams& params) {
    double used = goal.distance;
    bool adjusted = false;

    // Keep the goal direction pointing toward the structure side so the path
    // slides along the stand-off boundary instead of peeling away from it.
    const auto nearest = map.nearest_occupied(start);
    if (nearest) {
        const Vec2 to_structure = *nearest - start;
        if (to_structure.norm() <= params.repulse_radius + map.cell()) {
            double d = used;
            while ((goal.point_at(d).head<2>() - start).dot(to_structure) <= 0.0 &&
                   d > map.cell()) {
                d = adjusted ? 0.5 * d : 0.8 * d;
                adjusted = true;
            }
            if (adjusted) used = std::max(d, map.cell());
        }
    }

    LocalPath path = descend(start, goal.point_at(used).head<2>(), map, params);
    path.used_distance = used;
    path.goal_adjusted = adjusted;
    return path;
}

LocalPath plan_to_point(const Vec2& start, const Vec2& goal, const LocalCostMap& map,
                        const PotentialParams& params) {
    LocalPath path = descend(start, goal, map, params);
    path.used_distance = 0.0;
    return path;
}

}  // namespace structmap
