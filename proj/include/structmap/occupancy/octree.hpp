#pragma once

#include "structmap/geometry/types.hpp"

#include <cstdint>
#include <functional>

namespace structmap {

enum class VoxelState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2, Mixed = 3 };

inline const char* voxel_state_name(VoxelState s) {
    switch (s) {
        case VoxelState::Unknown: return "unknown";
        case VoxelState::Free: return "free";
        case VoxelState::Occupied: return "occupied";
        case VoxelState::Mixed: return "mixed";
    }
    return "?";
}

/// Integer leaf coordinates: key = floor(p / resolution) per axis.
struct VoxelKey {
    std::int32_t x = 0, y = 0, z = 0;
    bool operator==(const VoxelKey&) const = default;
};

/// Morton code over offset (non-negative) coordinates; used for deterministic
/// orderings of voxel sets.
std::uint64_t morton_code(const VoxelKey& k);

/// Ternary occupancy octree. Leaves are free, occupied or unknown; inner
/// nodes aggregate their children: occupied if any child is occupied, free if
/// all are free, unknown if all are unknown, mixed otherwise. Occupied leaves
/// are sticky: no insertion turns them back to free. Uniform subtrees are
/// stored as a single node, and the domain grows by re-rooting when an
/// insertion lands outside it.
class OccupancyOctree {
public:
    explicit OccupancyOctree(double leaf_resolution = 0.05, int initial_levels = 9);

    double resolution() const { return res_; }
    /// Depth of leaves below the current root (grows with the domain).
    int leaf_depth() const { return levels_; }
    double node_size(int depth) const { return res_ * std::pow(2.0, levels_ - depth); }

    VoxelKey key_for(const Vec3& p) const;
    Vec3 center_of(const VoxelKey& k) const;
    bool contains(const VoxelKey& k) const;

    bool set_free(const VoxelKey& k);      // unknown -> free only
    bool set_occupied(const VoxelKey& k);  // unknown/free -> occupied

    /// Leaf state; Unknown for keys outside the current domain.
    VoxelState leaf_state(const VoxelKey& k) const;

    /// Ray-cast insertion: for every point, the voxels strictly between the
    /// origin and the point become free (occupied stays occupied) and the
    /// point's voxel becomes occupied. Non-finite or absurdly distant points
    /// are skipped and counted.
    void insert_cloud(const Vec3& origin, const PointCloud& cloud_global);

    /// Aggregated state of the ancestor node at `depth` (0 = root,
    /// leaf_depth() = leaf) containing the point. Throws OutOfDomain.
    VoxelState query(const Vec3& p, int depth) const;

    /// Clearance surrogate: looks up the node whose size is the smallest one
    /// >= res and reports whether it contains no occupied leaf while being at
    /// least partially observed (state free, or mixed free/unknown). At leaf
    /// scale this is exactly "leaf is free".
    bool free_at_resolution(const Vec3& p, double res) const;

    std::uint64_t skipped_points() const { return skipped_; }
    std::size_t node_count() const;

    /// Visits maximal uniform regions: callback(min_leaf_key, level, state)
    /// where the region spans 2^level leaves per axis.
    void for_each_region(
        const std::function<void(const VoxelKey&, int, VoxelState)>& cb) const;

    /// Leaf keys of all occupied voxels intersecting the inclusive key box.
    void occupied_leaves_in_box(const VoxelKey& lo, const VoxelKey& hi,
                                std::vector<VoxelKey>& out) const;

    /// Verifies every inner node's state against the aggregation rule.
    bool audit() const;

private:
    struct Node {
        VoxelState state = VoxelState::Unknown;
        std::int32_t child = -1;  // index of 8 contiguous children, -1 = uniform
    };

    int alloc_block();
    void free_block(int idx);
    void grow_towards(const VoxelKey& k);
    bool set_rec(int node, int level, std::int32_t lx, std::int32_t ly, std::int32_t lz,
                 const VoxelKey& k, bool occupied);
    void region_rec(int node, int level, std::int32_t lx, std::int32_t ly, std::int32_t lz,
                    const std::function<void(const VoxelKey&, int, VoxelState)>& cb) const;
    void box_rec(int node, int level, std::int32_t lx, std::int32_t ly, std::int32_t lz,
                 const VoxelKey& lo, const VoxelKey& hi, std::vector<VoxelKey>& out) const;
    bool audit_rec(int node, VoxelState* state_out) const;

    double res_;
    int levels_;
    std::int32_t lo_[3];
    std::vector<Node> nodes_;
    std::vector<std::int32_t> free_blocks_;
    std::uint64_t skipped_ = 0;
};

}  // namespace structmap
