#include "structmap/occupancy/frontier.hpp"

#include "structmap/geometry/kdtree.hpp"
#include "structmap/geometry/pca.hpp"

#include <algorithm>

namespace structmap {

namespace {

const std::int32_t kNeighborOffsets[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                             {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};

}  // namespace

std::vector<FrontierVoxel> extract_frontier_voxels(const OccupancyOctree& octree,
                                                   double normal_radius_factor) {
    std::vector<VoxelKey> candidates;
    // Only the surface cells of a uniform free region can touch unknown space.
    octree.for_each_region([&](const VoxelKey& lo, int level, VoxelState state) {
        if (state != VoxelState::Free) return;
        const std::int32_t span = std::int32_t{1} << level;
        for (std::int32_t x = 0; x < span; ++x) {
            for (std::int32_t y = 0; y < span; ++y) {
                for (std::int32_t z = 0; z < span; ++z) {
                    if (x != 0 && x != span - 1 && y != 0 && y != span - 1 && z != 0 &&
                        z != span - 1) {
                        continue;
                    }
                    candidates.push_back(VoxelKey{lo.x + x, lo.y + y, lo.z + z});
                }
            }
        }
    });

    std::vector<FrontierVoxel> frontier;
    std::vector<Vec3> unknown_dirs;  // per frontier voxel, summed
    for (const VoxelKey& k : candidates) {
        Vec3 toward_unknown = Vec3::Zero();
        bool is_frontier = false;
        for (const auto& off : kNeighborOffsets) {
            const VoxelKey nb{k.x + off[0], k.y + off[1], k.z + off[2]};
            if (octree.leaf_state(nb) == VoxelState::Unknown) {
                is_frontier = true;
                toward_unknown += Vec3(off[0], off[1], off[2]);
            }
        }
        if (!is_frontier) continue;
        FrontierVoxel fv;
        fv.key = k;
        fv.center = octree.center_of(k);
        frontier.push_back(fv);
        unknown_dirs.push_back(toward_unknown);
    }

    std::vector<std::size_t> order(frontier.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return morton_code(frontier[a].key) < morton_code(frontier[b].key);
    });

    std::vector<FrontierVoxel> sorted;
    std::vector<Vec3> sorted_dirs;
    sorted.reserve(frontier.size());
    for (std::size_t i : order) {
        sorted.push_back(frontier[i]);
        sorted_dirs.push_back(unknown_dirs[i]);
    }

    // Normals from the local frontier sheet.
    std::vector<Vec3> centers;
    centers.reserve(sorted.size());
    for (const auto& f : sorted) centers.push_back(f.center);
    if (!centers.empty()) {
        KdTree tree(centers);
        const double radius = normal_radius_factor * octree.resolution();
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const auto nb = tree.radius_search(sorted[i].center, radius);
            Vec3 n;
            bool have_pca = false;
            if (nb.size() >= 3) {
                std::vector<Vec3> pts;
                pts.reserve(nb.size());
                for (int j : nb) pts.push_back(centers[j]);
                try {
                    n = pca_plane_fit(pts).normal();
                    have_pca = true;
                } catch (const DegenerateCloud&) {
                }
            }
            if (!have_pca) {
                n = sorted_dirs[i].norm() > 0.0 ? Vec3(-sorted_dirs[i].normalized())
                                                : Vec3::UnitZ();
            }
            if (n.dot(sorted_dirs[i]) > 0.0) n = -n;
            sorted[i].normal = n;
        }
    }
    return sorted;
}

}  // namespace structmap
