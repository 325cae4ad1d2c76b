#include "structmap/world/structure.hpp"

#include <algorithm>

namespace structmap {

namespace {

// Moeller-Trumbore; returns parametric distance along dir or a negative value.
double ray_triangle(const Vec3& o, const Vec3& d, const Triangle& tri) {
    constexpr double kEps = 1e-12;
    const Vec3 e1 = tri.b - tri.a;
    const Vec3 e2 = tri.c - tri.a;
    const Vec3 p = d.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < kEps) return -1.0;
    const double inv = 1.0 / det;
    const Vec3 t = o - tri.a;
    const double u = t.dot(p) * inv;
    if (u < -1e-9 || u > 1.0 + 1e-9) return -1.0;
    const Vec3 q = t.cross(e1);
    const double v = d.dot(q) * inv;
    if (v < -1e-9 || u + v > 1.0 + 1e-9) return -1.0;
    return e2.dot(q) * inv;
}

bool ray_hits_aabb(const Vec3& o, const Vec3& inv_d, const Vec3& lo, const Vec3& hi,
                   double max_t) {
    double tmin = 0.0, tmax = max_t;
    for (int i = 0; i < 3; ++i) {
        if (std::isinf(inv_d(i))) {
            if (o(i) < lo(i) || o(i) > hi(i)) return false;
            continue;
        }
        double t0 = (lo(i) - o(i)) * inv_d(i);
        double t1 = (hi(i) - o(i)) * inv_d(i);
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return false;
    }
    return true;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

}  // namespace

StructureModel::StructureModel(std::vector<Wall> walls) : walls_(std::move(walls)) {
    for (const Wall& w : walls_) {
        const Vec2 along = w.end - w.start;
        const double len = along.norm();
        if (len < 1e-9) throw Error("StructureModel: zero-length wall segment");
        const Vec2 u = along / len;
        const Vec2 n(-u.y(), u.x());
        const Vec2 h = n * (w.thickness * 0.5);

        WallBox box;
        box.corners[0] = w.start + h;
        box.corners[1] = w.start - h;
        box.corners[2] = w.end - h;
        box.corners[3] = w.end + h;

        Vec2 lo = box.corners[0], hi = box.corners[0];
        for (int i = 1; i < 4; ++i) {
            lo = lo.cwiseMin(box.corners[i]);
            hi = hi.cwiseMax(box.corners[i]);
        }
        box.aabb_lo = Vec3(lo.x(), lo.y(), 0.0);
        box.aabb_hi = Vec3(hi.x(), hi.y(), w.height);

        const int first = static_cast<int>(triangles_.size());
        Vec3 base[4], top[4];
        for (int i = 0; i < 4; ++i) {
            base[i] = Vec3(box.corners[i].x(), box.corners[i].y(), 0.0);
            top[i] = Vec3(box.corners[i].x(), box.corners[i].y(), w.height);
        }
        // 4 side faces + top face (bottom sits on the ground, never visible)
        for (int i = 0; i < 4; ++i) {
            const int j = (i + 1) % 4;
            triangles_.push_back({base[i], base[j], top[j]});
            triangles_.push_back({base[i], top[j], top[i]});
        }
        triangles_.push_back({top[0], top[1], top[2]});
        triangles_.push_back({top[0], top[2], top[3]});

        tri_range_.emplace_back(first, static_cast<int>(triangles_.size()));
        boxes_.push_back(box);
        max_height_ = std::max(max_height_, w.height);
    }
}

std::optional<Vec3> StructureModel::ray_cast(const Vec3& origin, const Vec3& dir,
                                             double max_range, bool include_ground) const {
    double best = max_range;
    bool hit = false;
    bool ground_hit = false;

    const Vec3 inv_d(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
    for (std::size_t w = 0; w < boxes_.size(); ++w) {
        if (!ray_hits_aabb(origin, inv_d, boxes_[w].aabb_lo, boxes_[w].aabb_hi, best)) continue;
        for (int t = tri_range_[w].first; t < tri_range_[w].second; ++t) {
            const double d = ray_triangle(origin, dir, triangles_[t]);
            if (d > 1e-9 && d < best) {
                best = d;
                hit = true;
                ground_hit = false;
            }
        }
    }

    if (include_ground && dir.z() < -1e-12 && origin.z() > 0.0) {
        const double d = -origin.z() / dir.z();
        if (d > 1e-9 && d < best) {
            best = d;
            hit = true;
            ground_hit = true;
        }
    }

    if (!hit) return std::nullopt;
    Vec3 p = origin + best * dir;
    if (ground_hit) p.z() = 0.0;
    return p;
}

double StructureModel::footprint_distance(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const WallBox& box : boxes_) {
        bool inside = true;
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
            const Vec2& a = box.corners[i];
            const Vec2& b = box.corners[(i + 1) % 4];
            if (cross2(b - a, p - a) < 0.0) inside = false;
            d = std::min(d, point_segment_distance(p, a, b));
        }
        best = std::min(best, inside ? 0.0 : d);
        if (best == 0.0) return 0.0;
    }
    return best;
}

bool StructureModel::footprint_contains(const Vec2& p) const {
    return footprint_distance(p) == 0.0;
}

void StructureModel::footprint_bounds(Vec2& lo, Vec2& hi) const {
    lo = Vec2(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const WallBox& box : boxes_) {
        for (const Vec2& c : box.corners) {
            lo = lo.cwiseMin(c);
            hi = hi.cwiseMax(c);
        }
    }
}

std::vector<Vec2> StructureModel::footprint_hull() const {
    std::vector<Vec2> pts;
    for (const WallBox& box : boxes_) {
        for (const Vec2& c : box.corners) pts.push_back(c);
    }
    if (pts.size() < 3) return pts;
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    // Andrew monotone chain
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Vec2& p : pts) {
        while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
        while (k >= lower && cross2(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0.0) --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace structmap
