#include "structmap/occupancy/octree.hpp"

#include <algorithm>
#include <cmath>

namespace structmap {

namespace {

std::uint64_t spread_bits(std::uint64_t v) {
    v &= 0x1fffff;  // 21 bits
    v = (v | v << 32) & 0x1f00000000ffffULL;
    v = (v | v << 16) & 0x1f0000ff0000ffULL;
    v = (v | v << 8) & 0x100f00f00f00f00fULL;
    v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
    v = (v | v << 2) & 0x1249249249249249ULL;
    return v;
}

VoxelState aggregate(const VoxelState s[8]) {
    bool any_occ = false, all_unknown = true, all_free = true;
    for (int i = 0; i < 8; ++i) {
        any_occ |= (s[i] == VoxelState::Occupied);
        all_unknown &= (s[i] == VoxelState::Unknown);
        all_free &= (s[i] == VoxelState::Free);
    }
    if (any_occ) return VoxelState::Occupied;
    if (all_unknown) return VoxelState::Unknown;
    if (all_free) return VoxelState::Free;
    return VoxelState::Mixed;
}

}  // namespace

std::uint64_t morton_code(const VoxelKey& k) {
    const std::uint64_t bias = 1u << 20;
    return spread_bits(static_cast<std::uint64_t>(k.x + bias)) |
           (spread_bits(static_cast<std::uint64_t>(k.y + bias)) << 1) |
           (spread_bits(static_cast<std::uint64_t>(k.z + bias)) << 2);
}

OccupancyOctree::OccupancyOctree(double leaf_resolution, int initial_levels)
    : res_(leaf_resolution), levels_(initial_levels) {
    if (res_ <= 0.0) throw Error("OccupancyOctree: resolution must be positive");
    const std::int32_t half = std::int32_t{1} << (levels_ - 1);
    lo_[0] = lo_[1] = lo_[2] = -half;
    nodes_.push_back(Node{});
}

VoxelKey OccupancyOctree::key_for(const Vec3& p) const {
    return VoxelKey{static_cast<std::int32_t>(std::floor(p.x() / res_)),
                    static_cast<std::int32_t>(std::floor(p.y() / res_)),
                    static_cast<std::int32_t>(std::floor(p.z() / res_))};
}

Vec3 OccupancyOctree::center_of(const VoxelKey& k) const {
    return Vec3((k.x + 0.5) * res_, (k.y + 0.5) * res_, (k.z + 0.5) * res_);
}

bool OccupancyOctree::contains(const VoxelKey& k) const {
    const std::int32_t span = std::int32_t{1} << levels_;
    return k.x >= lo_[0] && k.x < lo_[0] + span && k.y >= lo_[1] && k.y < lo_[1] + span &&
           k.z >= lo_[2] && k.z < lo_[2] + span;
}

int OccupancyOctree::alloc_block() {
    if (!free_blocks_.empty()) {
        const int idx = free_blocks_.back();
        free_blocks_.pop_back();
        for (int i = 0; i < 8; ++i) nodes_[idx + i] = Node{};
        return idx;
    }
    const int idx = static_cast<int>(nodes_.size());
    nodes_.resize(nodes_.size() + 8);
    return idx;
}

void OccupancyOctree::free_block(int idx) { free_blocks_.push_back(idx); }

void OccupancyOctree::grow_towards(const VoxelKey& k) {
    while (!contains(k)) {
        if (levels_ >= 22) throw OutOfDomain("OccupancyOctree: domain limit reached");
        const std::int32_t span = std::int32_t{1} << levels_;
        int octant = 0;
        for (int a = 0; a < 3; ++a) {
            const std::int32_t c = a == 0 ? k.x : (a == 1 ? k.y : k.z);
            const bool grow_down = c < lo_[a];
            if (grow_down) {
                lo_[a] -= span;
                octant |= 1 << a;  // old root sits in the upper half
            }
        }
        const Node old_root = nodes_[0];
        const int block = alloc_block();
        nodes_[block + octant] = old_root;
        nodes_[0].child = block;
        // Aggregate is unchanged by adding unknown siblings unless it was
        // uniform; recompute from the block.
        VoxelState s[8];
        for (int i = 0; i < 8; ++i) s[i] = nodes_[block + i].state;
        nodes_[0].state = aggregate(s);
        ++levels_;
    }
}

bool OccupancyOctree::set_rec(int node, int level, std::int32_t lx, std::int32_t ly,
                              std::int32_t lz, const VoxelKey& k, bool occupied) {
    Node& n = nodes_[node];
    const VoxelState want = occupied ? VoxelState::Occupied : VoxelState::Free;

    if (n.child < 0) {
        if (n.state == VoxelState::Occupied) return false;  // sticky
        if (n.state == want) return false;
        if (level == 0) {
            // unknown -> free/occupied, free -> occupied
            n.state = want;
            return true;
        }
        // split the uniform subtree and fall through
        const int block = alloc_block();
        for (int i = 0; i < 8; ++i) nodes_[block + i].state = nodes_[node].state;
        nodes_[node].child = block;
    }

    const std::int32_t half = std::int32_t{1} << (level - 1);
    const int bx = k.x >= lx + half ? 1 : 0;
    const int by = k.y >= ly + half ? 1 : 0;
    const int bz = k.z >= lz + half ? 1 : 0;
    const int child_idx = nodes_[node].child + (bx | (by << 1) | (bz << 2));
    const bool changed = set_rec(child_idx, level - 1, lx + bx * half, ly + by * half,
                                 lz + bz * half, k, occupied);
    if (!changed) return false;

    Node& parent = nodes_[node];
    VoxelState s[8];
    bool all_uniform = true;
    for (int i = 0; i < 8; ++i) {
        const Node& c = nodes_[parent.child + i];
        s[i] = c.state;
        all_uniform &= (c.child < 0);
    }
    parent.state = aggregate(s);
    if (all_uniform && parent.state != VoxelState::Mixed &&
        std::all_of(s, s + 8, [&](VoxelState v) { return v == s[0]; })) {
        free_block(parent.child);
        parent.child = -1;
    }
    return true;
}

bool OccupancyOctree::set_free(const VoxelKey& k) {
    grow_towards(k);
    return set_rec(0, levels_, lo_[0], lo_[1], lo_[2], k, false);
}

bool OccupancyOctree::set_occupied(const VoxelKey& k) {
    grow_towards(k);
    return set_rec(0, levels_, lo_[0], lo_[1], lo_[2], k, true);
}

VoxelState OccupancyOctree::leaf_state(const VoxelKey& k) const {
    if (!contains(k)) return VoxelState::Unknown;
    int node = 0;
    int level = levels_;
    std::int32_t lx = lo_[0], ly = lo_[1], lz = lo_[2];
    while (nodes_[node].child >= 0) {
        const std::int32_t half = std::int32_t{1} << (level - 1);
        const int bx = k.x >= lx + half ? 1 : 0;
        const int by = k.y >= ly + half ? 1 : 0;
        const int bz = k.z >= lz + half ? 1 : 0;
        node = nodes_[node].child + (bx | (by << 1) | (bz << 2));
        lx += bx * half;
        ly += by * half;
        lz += bz * half;
        --level;
    }
    return nodes_[node].state;
}

void OccupancyOctree::insert_cloud(const Vec3& origin, const PointCloud& cloud_global) {
    cloud_global.require_frame(FrameTag::Global, "insert_cloud");

    const VoxelKey origin_key = key_for(origin);
    for (const Vec3& p : cloud_global.points) {
        if (!p.allFinite() || p.cwiseAbs().maxCoeff() > 1e4) {
            ++skipped_;
            continue;
        }
        const VoxelKey end_key = key_for(p);
        grow_towards(origin_key);
        grow_towards(end_key);

        // Amanatides-Woo traversal from origin to p, marking strictly
        // intermediate voxels free.
        VoxelKey k = origin_key;
        const Vec3 d = p - origin;
        double t_max[3], t_delta[3];
        int step[3];
        const std::int32_t kc[3] = {k.x, k.y, k.z};
        for (int a = 0; a < 3; ++a) {
            if (d(a) > 1e-15) {
                step[a] = 1;
                t_max[a] = ((kc[a] + 1) * res_ - origin(a)) / d(a);
                t_delta[a] = res_ / d(a);
            } else if (d(a) < -1e-15) {
                step[a] = -1;
                t_max[a] = (kc[a] * res_ - origin(a)) / d(a);
                t_delta[a] = -res_ / d(a);
            } else {
                step[a] = 0;
                t_max[a] = t_delta[a] = std::numeric_limits<double>::infinity();
            }
        }
        const long cap = std::labs(end_key.x - k.x) + std::labs(end_key.y - k.y) +
                         std::labs(end_key.z - k.z) + 3;
        long iter = 0;
        while (!(k == end_key) && iter++ < cap) {
            int axis = 0;
            if (t_max[1] < t_max[axis]) axis = 1;
            if (t_max[2] < t_max[axis]) axis = 2;
            if (axis == 0) k.x += step[0];
            else if (axis == 1) k.y += step[1];
            else k.z += step[2];
            t_max[axis] += t_delta[axis];
            if (!(k == end_key)) set_free(k);
        }
        set_occupied(end_key);
    }
}

VoxelState OccupancyOctree::query(const Vec3& p, int depth) const {
    if (depth < 0 || depth > levels_) throw Error("query: bad depth");
    const VoxelKey k = key_for(p);
    if (!contains(k)) throw OutOfDomain("query: point outside octree domain");
    int node = 0;
    int level = levels_;
    std::int32_t lx = lo_[0], ly = lo_[1], lz = lo_[2];
    for (int d = 0; d < depth; ++d) {
        if (nodes_[node].child < 0) return nodes_[node].state;  // uniform below
        const std::int32_t half = std::int32_t{1} << (level - 1);
        const int bx = k.x >= lx + half ? 1 : 0;
        const int by = k.y >= ly + half ? 1 : 0;
        const int bz = k.z >= lz + half ? 1 : 0;
        node = nodes_[node].child + (bx | (by << 1) | (bz << 2));
        lx += bx * half;
        ly += by * half;
        lz += bz * half;
        --level;
    }
    return nodes_[node].state;
}

bool OccupancyOctree::free_at_resolution(const Vec3& p, double res) const {
    if (res < res_) throw Error("free_at_resolution: res below leaf resolution");
    int level = 0;
    while (res_ * std::pow(2.0, level) < res - 1e-12 && level < levels_) ++level;
    const VoxelState s = query(p, levels_ - level);
    return s == VoxelState::Free || s == VoxelState::Mixed;
}

std::size_t OccupancyOctree::node_count() const {
    return nodes_.size() - 8 * free_blocks_.size();
}

void OccupancyOctree::region_rec(
    int node, int level, std::int32_t lx, std::int32_t ly, std::int32_t lz,
    const std::function<void(const VoxelKey&, int, VoxelState)>& cb) const {
    const Node& n = nodes_[node];
    if (n.child < 0) {
        cb(VoxelKey{lx, ly, lz}, level, n.state);
        return;
    }
    const std::int32_t half = std::int32_t{1} << (level - 1);
    for (int i = 0; i < 8; ++i) {
        region_rec(n.child + i, level - 1, lx + (i & 1) * half, ly + ((i >> 1) & 1) * half,
                   lz + ((i >> 2) & 1) * half, cb);
    }
}

void OccupancyOctree::for_each_region(
    const std::function<void(const VoxelKey&, int, VoxelState)>& cb) const {
    region_rec(0, levels_, lo_[0], lo_[1], lo_[2], cb);
}

void OccupancyOctree::box_rec(int node, int level, std::int32_t lx, std::int32_t ly,
                              std::int32_t lz, const VoxelKey& lo, const VoxelKey& hi,
                              std::vector<VoxelKey>& out) const {
    const std::int32_t span = std::int32_t{1} << level;
    if (lx > hi.x || ly > hi.y || lz > hi.z || lx + span <= lo.x || ly + span <= lo.y ||
        lz + span <= lo.z) {
        return;
    }
    const Node& n = nodes_[node];
    if (n.child < 0) {
        if (n.state != VoxelState::Occupied) return;
        const std::int32_t x0 = std::max(lx, lo.x), x1 = std::min(lx + span - 1, hi.x);
        const std::int32_t y0 = std::max(ly, lo.y), y1 = std::min(ly + span - 1, hi.y);
        const std::int32_t z0 = std::max(lz, lo.z), z1 = std::min(lz + span - 1, hi.z);
        for (std::int32_t x = x0; x <= x1; ++x)
            for (std::int32_t y = y0; y <= y1; ++y)
                for (std::int32_t z = z0; z <= z1; ++z) out.push_back(VoxelKey{x, y, z});
        return;
    }
    const std::int32_t half = span >> 1;
    for (int i = 0; i < 8; ++i) {
        box_rec(n.child + i, level - 1, lx + (i & 1) * half, ly + ((i >> 1) & 1) * half,
                lz + ((i >> 2) & 1) * half, lo, hi, out);
    }
}

void OccupancyOctree::occupied_leaves_in_box(const VoxelKey& lo, const VoxelKey& hi,
                                             std::vector<VoxelKey>& out) const {
    box_rec(0, levels_, lo_[0], lo_[1], lo_[2], lo, hi, out);
}

bool OccupancyOctree::audit_rec(int node, VoxelState* state_out) const {
    const Node& n = nodes_[node];
    if (n.child < 0) {
        *state_out = n.state;
        return n.state != VoxelState::Mixed;  // uniform nodes must be pure
    }
    VoxelState s[8];
    for (int i = 0; i < 8; ++i) {
        if (!audit_rec(n.child + i, &s[i])) return false;
    }
    *state_out = n.state;
    return n.state == aggregate(s);
}

bool OccupancyOctree::audit() const {
    VoxelState s;
    return audit_rec(0, &s);
}

}  // namespace structmap
