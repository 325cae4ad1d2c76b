#include "structmap/fbe/grid2d.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace structmap {

bool point_in_polygon(std::span<const Vec2> polygon, const Vec2& p) {
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
            inside = !inside;
        }
    }
    return inside;
}

Grid2D::Grid2D(const Vec2& lo, const Vec2& hi, double cell) : origin_(lo), cell_(cell) {
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / cell)));
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell)));
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, Cell2D::Unknown);
}

Cell2D Grid2D::at(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return Cell2D::Unknown;
    return cells_[static_cast<std::size_t>(iy) * nx_ + ix];
}

Vec2 Grid2D::center_of(int ix, int iy) const {
    return Vec2(origin_.x() + (ix + 0.5) * cell_, origin_.y() + (iy + 0.5) * cell_);
}

bool Grid2D::index_of(const Vec2& p, int& ix, int& iy) const {
    ix = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
    iy = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
    return ix >= 0 && iy >= 0 && ix < nx_ && iy < ny_;
}

void Grid2D::mark_free_segment(const Vec2& from, const Vec2& to) {
    const double len = (to - from).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * cell_))));
    for (int i = 0; i <= steps; ++i) {
        const Vec2 p = from + (to - from) * (static_cast<double>(i) / steps);
        int ix, iy;
        if (!index_of(p, ix, iy)) continue;
        Cell2D& c = cells_[static_cast<std::size_t>(iy) * nx_ + ix];
        if (c == Cell2D::Unknown) c = Cell2D::Free;
    }
}

void Grid2D::mark_occupied(const Vec2& p) {
    int ix, iy;
    if (!index_of(p, ix, iy)) return;
    cells_[static_cast<std::size_t>(iy) * nx_ + ix] = Cell2D::Occupied;
}

void Grid2D::update_from_capture(const Vec2& sensor, const PointCloud& cloud_global,
                                 double h_max, double ground_eps) {
    cloud_global.require_frame(FrameTag::Global, "Grid2D::update_from_capture");
    for (const Vec3& p : cloud_global.points) {
        const Vec2 q(p.x(), p.y());
        mark_free_segment(sensor, q);
        if (p.z() > ground_eps && p.z() <= h_max) {
            mark_occupied(q);
        }
    }
}

std::vector<Vec2> Grid2D::occupied_centers() const {
    std::vector<Vec2> out;
    for (int iy = 0; iy < ny_; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
            if (at(ix, iy) == Cell2D::Occupied) out.push_back(center_of(ix, iy));
        }
    }
    return out;
}

std::vector<FrontierCluster> Grid2D::extract_frontiers(
    std::span<const Vec2> polygon, const Vec2& robot,
    std::span<const std::pair<int, int>> blacklist) const {
    const std::set<std::pair<int, int>> banned(blacklist.begin(), blacklist.end());

    const auto is_frontier = [&](int ix, int iy) {
        if (at(ix, iy) != Cell2D::Free) return false;
        if (!point_in_polygon(polygon, center_of(ix, iy))) return false;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                if (at(ix + dx, iy + dy) == Cell2D::Unknown) return true;
            }
        }
        return false;
    };

    std::vector<char> visited(cells_.size(), 0);
    std::vector<FrontierCluster> clusters;
    for (int iy = 0; iy < ny_; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
            const std::size_t idx = static_cast<std::size_t>(iy) * nx_ + ix;
            if (visited[idx] || !is_frontier(ix, iy)) continue;

            FrontierCluster cluster;
            std::deque<std::pair<int, int>> queue{{ix, iy}};
            visited[idx] = 1;
            Vec2 sum = Vec2::Zero();
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                cluster.cells.emplace_back(cx, cy);
                sum += center_of(cx, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= nx_ || ny >= ny_) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ny) * nx_ + nx;
                        if (visited[nidx] || !is_frontier(nx, ny)) continue;
                        visited[nidx] = 1;
                        queue.emplace_back(nx, ny);
                    }
                }
            }
            cluster.centroid = sum / static_cast<double>(cluster.cells.size());
            if (!banned.count(cluster.cells.front())) clusters.push_back(std::move(cluster));
        }
    }

    std::stable_sort(clusters.begin(), clusters.end(),
                     [&](const FrontierCluster& a, const FrontierCluster& b) {
                         return (a.centroid - robot).norm() < (b.centroid - robot).norm();
                     });
    return clusters;
}

}  // namespace structmap
