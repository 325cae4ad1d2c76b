#pragma once

#include "structmap/geometry/types.hpp"

#include <optional>

namespace structmap {

/// Extruded wall segment: centerline on the ground plane, constant height and
/// thickness. The footprint is an oriented rectangle, the solid a box.
struct Wall {
    Vec2 start = Vec2::Zero();
    Vec2 end = Vec2::Zero();
    double height = 1.4;
    double thickness = 0.2;
};

struct Triangle {
    Vec3 a, b, c;
};

/// Ground-truth environment: vertical walls standing on the z=0 plane.
/// Ray casting treats the ground as an implicit surface so depth images
/// contain ground returns.
class StructureModel {
public:
    StructureModel() = default;
    explicit StructureModel(std::vector<Wall> walls);

    const std::vector<Wall>& walls() const { return walls_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }

    /// Nearest intersection along origin + t*dir for t in (0, max_range], or
    /// nullopt. dir must be unit length.
    std::optional<Vec3> ray_cast(const Vec3& origin, const Vec3& dir, double max_range,
                                 bool include_ground = true) const;

    /// 2D distance from p to the closest wall footprint (0 inside a wall).
    double footprint_distance(const Vec2& p) const;
    bool footprint_contains(const Vec2& p) const;

    /// Axis-aligned bounds of all wall footprints.
    void footprint_bounds(Vec2& lo, Vec2& hi) const;

    /// Convex hull of the footprint corners, counter-clockwise.
    std::vector<Vec2> footprint_hull() const;

    double max_height() const { return max_height_; }

private:
    struct WallBox {
        Vec2 corners[4];  // footprint, counter-clockwise
        Vec3 aabb_lo, aabb_hi;
    };

    std::vector<Wall> walls_;
    std::vector<WallBox> boxes_;
    std::vector<Triangle> triangles_;
    std::vector<std::pair<int, int>> tri_range_;  // per wall: [first, last) triangle
    double max_height_ = 0.0;
};

}  // namespace structmap
