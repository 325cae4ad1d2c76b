#include "structmap/metrics/metrics.hpp"

#include "structmap/geometry/kdtree.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace structmap {

namespace {

// Hash-grid duplicate filter enforcing the minimum inter-point spacing.
class SpacingFilter {
public:
    explicit SpacingFilter(double spacing) : spacing_(spacing) {}

    bool accept(const Vec3& p) {
        const auto cell = key(p);
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dz = -1; dz <= 1; ++dz) {
                    const auto it = cells_.find(pack(cell[0] + dx, cell[1] + dy, cell[2] + dz));
                    if (it == cells_.end()) continue;
                    for (const Vec3& q : it->second) {
                        if ((p - q).norm() < spacing_ - 1e-9) return false;
                    }
                }
            }
        }
        cells_[pack(cell[0], cell[1], cell[2])].push_back(p);
        return true;
    }

private:
    std::array<int, 3> key(const Vec3& p) const {
        return {static_cast<int>(std::floor(p.x() / spacing_)),
                static_cast<int>(std::floor(p.y() / spacing_)),
                static_cast<int>(std::floor(p.z() / spacing_))};
    }
    static std::uint64_t pack(int x, int y, int z) {
        const auto u = [](int v) { return static_cast<std::uint64_t>(v + (1 << 20)) & 0x1fffff; };
        return u(x) | (u(y) << 21) | (u(z) << 42);
    }

    double spacing_;
    std::unordered_map<std::uint64_t, std::vector<Vec3>> cells_;
};

// Cells reachable from outside the structure footprint (8-connected flood).
class ReachableField {
public:
    ReachableField(const StructureModel& structure, double margin, double cell)
        : cell_(cell) {
        Vec2 lo, hi;
        structure.footprint_bounds(lo, hi);
        origin_ = lo - Vec2::Constant(margin);
        const Vec2 top = hi + Vec2::Constant(margin);
        nx_ = static_cast<int>(std::ceil((top.x() - origin_.x()) / cell_));
        ny_ = static_cast<int>(std::ceil((top.y() - origin_.y()) / cell_));
        blocked_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
        reachable_.assign(blocked_.size(), 0);
        for (int iy = 0; iy < ny_; ++iy) {
            for (int ix = 0; ix < nx_; ++ix) {
                const Vec2 c = origin_ + Vec2((ix + 0.5) * cell_, (iy + 0.5) * cell_);
                if (structure.footprint_distance(c) < 0.5 * cell_) {
                    blocked_[idx(ix, iy)] = 1;
                }
            }
        }
        std::deque<std::pair<int, int>> queue;
        for (int ix = 0; ix < nx_; ++ix) {
            for (int iy : {0, ny_ - 1}) push(queue, ix, iy);
        }
        for (int iy = 0; iy < ny_; ++iy) {
            for (int ix : {0, nx_ - 1}) push(queue, ix, iy);
        }
        while (!queue.empty()) {
            const auto [ix, iy] = queue.front();
            queue.pop_front();
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx || dy) push(queue, ix + dx, iy + dy);
                }
            }
        }
    }

    bool reachable(const Vec2& p) const {
        const int ix = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
        const int iy = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
        if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return true;
        return reachable_[idx(ix, iy)] != 0;
    }

private:
    std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx_ + ix; }
    void push(std::deque<std::pair<int, int>>& queue, int ix, int iy) {
        if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return;
        const std::size_t i = idx(ix, iy);
        if (blocked_[i] || reachable_[i]) return;
        reachable_[i] = 1;
        queue.emplace_back(ix, iy);
    }

    Vec2 origin_;
    double cell_;
    int nx_ = 0, ny_ = 0;
    std::vector<char> blocked_;
    std::vector<char> reachable_;
};

}  // namespace

PointCloud reference_cloud(const StructureModel& structure, const CameraModel& cam,
                           double spacing) {
    PointCloud cloud(FrameTag::Global);
    const ReachableField reach(structure, 2.0 * cam.range, 0.1);
    SpacingFilter filter(spacing);

    for (const Wall& wall : structure.walls()) {
        const Vec2 along = wall.end - wall.start;
        const double len = along.norm();
        const Vec2 u = along / len;
        const Vec2 n(-u.y(), u.x());
        const double half = wall.thickness * 0.5;
        const double z_top = std::min(wall.height, cam.h_max());

        struct Face {
            Vec2 base;
            Vec2 dir;
            double len;
            Vec2 outward;
        };
        const Face faces[4] = {
            {wall.start + n * half, u, len, n},
            {wall.start - n * half, u, len, -n},
            {wall.start - n * half, n, wall.thickness, -u},
            {wall.end - n * half, n, wall.thickness, u},
        };

        for (const Face& face : faces) {
            const int n_u = static_cast<int>(std::floor(face.len / spacing + 1e-9)) + 1;
            const int n_z = static_cast<int>(std::floor(z_top / spacing + 1e-9)) + 1;
            for (int i = 0; i < n_u; ++i) {
                const Vec2 p2 = face.base + face.dir * (i * spacing);
                if (!reach.reachable(p2 + face.outward * 0.15)) continue;
                if (structure.footprint_distance(p2 + face.outward * 0.02) <= 0.0) continue;
                for (int j = 0; j < n_z; ++j) {
                    const Vec3 p(p2.x(), p2.y(), j * spacing);
                    if (filter.accept(p)) cloud.points.push_back(p);
                }
            }
        }
    }
    return cloud;
}

ErrorStats reconstruction_error(const PointCloud& reconstruction, const PointCloud& reference,
                                PointCloud* aligned_out) {
    if (reconstruction.empty() || reference.empty()) {
        throw EmptyTarget("reconstruction_error: empty cloud");
    }
    const IcpResult icp = icp_register(reconstruction, reference);
    const PointCloud aligned = icp.transform.apply(reconstruction);

    KdTree tree(reference.points);
    ErrorStats stats;
    stats.n = aligned.size();
    stats.icp_converged = icp.converged && !icp.degenerate;
    double sum = 0.0, sum_sq = 0.0;
    for (const Vec3& p : aligned.points) {
        const double d = tree.nearest(p).second;
        sum += d;
        sum_sq += d * d;
        stats.max = std::max(stats.max, d);
    }
    stats.mean = sum / static_cast<double>(stats.n);
    stats.stddev =
        std::sqrt(std::max(0.0, sum_sq / static_cast<double>(stats.n) - stats.mean * stats.mean));
    if (aligned_out) *aligned_out = aligned;
    return stats;
}

int unique_coverage(const PointCloud& aligned, const PointCloud& reference) {
    if (aligned.empty() || reference.empty()) return 0;
    KdTree tree(reference.points);
    std::unordered_set<int> hit;
    for (const Vec3& p : aligned.points) hit.insert(tree.nearest(p).first);
    return static_cast<int>(hit.size());
}

double path_length(std::span<const TrajectoryRow> trajectory) {
    double total = 0.0;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        total += (trajectory[i].true_pose.position() - trajectory[i - 1].true_pose.position())
                     .norm();
    }
    return total;
}

MetricsReport compute_metrics(const Scenario& scenario, const std::string& policy,
                              const World& world, const RunState& state,
                              const std::string& status, double runtime_s) {
    MetricsReport report;
    report.scenario = scenario.name;
    report.policy = policy;
    report.k = scenario.noise_k;
    report.seed = scenario.seed;
    report.status = status;
    report.runtime_s = runtime_s;
    report.path_length_m = path_length(state.trajectory);

    const PointCloud reference = reference_cloud(world.structure, world.camera);
    report.reference_size = static_cast<int>(reference.size());

    PointCloud model(FrameTag::Global);
    for (const Vec3& p : state.global_cloud.points) {
        if (p.z() > scenario.planner.ground_eps && p.z() <= world.camera.h_max()) {
            model.points.push_back(p);
        }
    }
    report.n_points = static_cast<int>(model.size());
    if (model.size() >= 3 && reference.size() >= 3) {
        PointCloud aligned;
        const ErrorStats stats = reconstruction_error(model, reference, &aligned);
        report.mu_m = stats.mean;
        report.sigma_m = stats.stddev;
        report.max_m = stats.max;
        report.icp_converged = stats.icp_converged;
        report.coverage = unique_coverage(aligned, reference);
    }
    return report;
}

}  // namespace structmap
