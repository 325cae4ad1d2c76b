#pragma once

#include "structmap/geometry/types.hpp"

#include <span>
#include <vector>

namespace structmap {

enum class Cell2D : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

bool point_in_polygon(std::span<const Vec2> polygon, const Vec2& p);

struct FrontierCluster {
    std::vector<std::pair<int, int>> cells;
    Vec2 centroid = Vec2::Zero();
};

/// Planar ternary occupancy grid for the frontier-based baseline. Structure
/// points project to occupied cells, the 2D footprints of the sensing rays to
/// free cells.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(const Vec2& lo, const Vec2& hi, double cell = 0.1);

    double cell() const { return cell_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    Cell2D at(int ix, int iy) const;
    Vec2 center_of(int ix, int iy) const;
    bool index_of(const Vec2& p, int& ix, int& iy) const;

    void mark_free_segment(const Vec2& from, const Vec2& to);
    void mark_occupied(const Vec2& p);

    /// Integrates one capture: structure points (ground_eps < z <= h_max)
    /// become occupied endpoints, every ray footprint frees the cells it
    /// crosses, ground returns free their endpoint as well.
    void update_from_capture(const Vec2& sensor, const PointCloud& cloud_global, double h_max,
                             double ground_eps);

    std::vector<Vec2> occupied_centers() const;

    /// Free cells with an unknown 8-neighbor, inside the polygon, grouped by
    /// 8-connectivity and ordered by centroid distance from the robot.
    std::vector<FrontierCluster> extract_frontiers(std::span<const Vec2> polygon,
                                                   const Vec2& robot,
                                                   std::span<const std::pair<int, int>>
                                                       blacklist = {}) const;

private:
    Vec2 origin_ = Vec2::Zero();
    double cell_ = 0.1;
    int nx_ = 0, ny_ = 0;
    std::vector<Cell2D> cells_;
};

}  // namespace structmap
