#pragma once

#include "structmap/occupancy/octree.hpp"

namespace structmap {

/// Free leaf voxel with at least one unknown 6-neighbor. The normal comes
/// from PCA over nearby frontier voxels, signed to point into observed free
/// space (away from the unknown side).
struct FrontierVoxel {
    VoxelKey key;
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
};

/// Deterministic (Morton-ordered) frontier extraction. normal_radius_factor
/// scales the leaf size to the PCA neighborhood radius.
std::vector<FrontierVoxel> extract_frontier_voxels(const OccupancyOctree& octree,
                                                   double normal_radius_factor = 3.0);

}  // namespace structmap
