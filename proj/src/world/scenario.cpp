#include "structmap/world/scenario.hpp"

#include "structmap/world/sensors.hpp"

#include <json.hpp>

#include <fstream>

namespace structmap {

using nlohmann::json;

std::vector<Vec2> Scenario::fbe_polygon_or_default(const StructureModel& structure) const {
    if (fbe_polygon && fbe_polygon->size() >= 3) return *fbe_polygon;
    Vec2 lo, hi;
    structure.footprint_bounds(lo, hi);
    const double m = 2.0 * planner.distance;
    return {Vec2(lo.x() - m, lo.y() - m), Vec2(hi.x() + m, lo.y() - m),
            Vec2(hi.x() + m, hi.y() + m), Vec2(lo.x() - m, hi.y() + m)};
}

namespace {

Vec2 vec2_from(const json& j) { return Vec2(j.at(0).get<double>(), j.at(1).get<double>()); }

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_scenario: cannot open " + path);
    json j;
    in >> j;

    Scenario s;
    s.name = j.value("name", std::string("scenario"));
    s.perimeter = j.value("perimeter_m", 0.0);

    for (const auto& jw : j.at("walls")) {
        Wall w;
        w.start = vec2_from(jw.at("start"));
        w.end = vec2_from(jw.at("end"));
        w.height = jw.value("height", 1.4);
        w.thickness = jw.value("thickness", 0.2);
        s.walls.push_back(w);
    }

    const auto& jp = j.at("start_pose");
    s.start.x = jp.at("x").get<double>();
    s.start.y = jp.at("y").get<double>();
    s.start.yaw_camera = jp.at("camera_yaw_deg").get<double>() * M_PI / 180.0;

    const auto& jc = j.at("camera");
    s.camera.range = jc.at("range").get<double>();
    s.camera.psi = jc.at("psi_deg").get<double>() * M_PI / 180.0;
    s.camera.phi = jc.at("phi_deg").get<double>() * M_PI / 180.0;
    s.camera.height = jc.at("height").get<double>();
    s.camera.rows = jc.value("rows", 48);
    s.camera.cols = jc.value("cols", 64);

    s.noise_k = j.value("noise_k", 0.0);
    s.seed = j.value("seed", std::uint64_t{1});

    PlannerParams& p = s.planner;
    p.distance = j.value("D", p.distance);
    p.d0 = j.value("d0", p.d0);
    p.alpha = j.value("alpha", p.alpha);
    p.beta = j.value("beta", p.beta);
    p.delta_min = j.value("delta_min", p.delta_min);
    if (j.contains("tuning")) {
        const auto& jt = j["tuning"];
        p.delta_step = jt.value("delta_step", p.delta_step);
        p.cell = jt.value("cell", p.cell);
        p.leaf = jt.value("leaf", p.leaf);
        p.normal_tol = jt.value("normal_tol_deg", p.normal_tol * 180.0 / M_PI) * M_PI / 180.0;
        p.min_entrance_voxels = jt.value("min_entrance_voxels", p.min_entrance_voxels);
        p.ground_eps = jt.value("ground_eps", p.ground_eps);
        p.v_max = jt.value("v_max", p.v_max);
        p.capture_period = jt.value("capture_period", p.capture_period);
        p.tick_cap = jt.value("tick_cap", p.tick_cap);
        p.cavity_tick_cap = jt.value("cavity_tick_cap", p.cavity_tick_cap);
    }

    if (j.contains("fbe_polygon")) {
        std::vector<Vec2> poly;
        for (const auto& jv : j["fbe_polygon"]) poly.push_back(vec2_from(jv));
        s.fbe_polygon = std::move(poly);
    }

    if (p.distance <= 0.0 || p.distance >= s.camera.range) {
        throw Error("load_scenario: D must satisfy 0 < D < camera range");
    }
    if (s.camera.range <= 0.0 || s.camera.psi <= 0.0 || s.camera.psi >= M_PI ||
        s.camera.phi <= 0.0 || s.camera.phi >= M_PI) {
        throw Error("load_scenario: bad camera parameters");
    }
    if (s.noise_k < 0.0) throw Error("load_scenario: noise_k must be >= 0");
    if (p.d0 < p.leaf) throw Error("load_scenario: d0 must be >= leaf resolution");
    return s;
}

void save_scenario(const std::string& path, const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["perimeter_m"] = s.perimeter;
    j["walls"] = json::array();
    for (const auto& w : s.walls) {
        j["walls"].push_back({{"start", {w.start.x(), w.start.y()}},
                              {"end", {w.end.x(), w.end.y()}},
                              {"height", w.height},
                              {"thickness", w.thickness}});
    }
    j["start_pose"] = {{"x", s.start.x},
                       {"y", s.start.y},
                       {"camera_yaw_deg", s.start.yaw_camera * 180.0 / M_PI}};
    j["camera"] = {{"range", s.camera.range},
                   {"psi_deg", s.camera.psi * 180.0 / M_PI},
                   {"phi_deg", s.camera.phi * 180.0 / M_PI},
                   {"height", s.camera.height},
                   {"rows", s.camera.rows},
                   {"cols", s.camera.cols}};
    j["noise_k"] = s.noise_k;
    j["seed"] = s.seed;
    j["D"] = s.planner.distance;
    j["d0"] = s.planner.d0;
    j["alpha"] = s.planner.alpha;
    j["beta"] = s.planner.beta;
    j["delta_min"] = s.planner.delta_min;
    if (s.fbe_polygon) {
        j["fbe_polygon"] = json::array();
        for (const auto& v : *s.fbe_polygon) j["fbe_polygon"].push_back({v.x(), v.y()});
    }
    std::ofstream out(path);
    if (!out) throw Error("save_scenario: cannot open " + path);
    out << j.dump(2) << "\n";
}

std::vector<ScenarioViolation> validate_scenario(const StructureModel& structure,
                                                 const RobotPose& start,
                                                 const CameraModel& camera) {
    std::vector<ScenarioViolation> violations;

    // IC1: the robot must sit strictly outside the structure's convex hull so
    // a separating vertical plane exists.
    const auto hull = structure.footprint_hull();
    const Vec2 p = start.position();
    bool inside_hull = hull.size() >= 3;
    for (std::size_t i = 0; inside_hull && i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        const Vec2 e = b - a;
        if (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x()) <= 1e-9) inside_hull = false;
    }
    if (inside_hull || structure.footprint_contains(p)) {
        violations.push_back({"IC1", "robot start is not separable from the structure"});
    }

    // IC2: the first depth image must contain structure (non-ground) points.
    const PointCloud first = render_depth(start, camera, structure);
    bool sees_structure = false;
    for (const auto& q : first.points) {
        if (q.z() + camera.height > 1e-6) {
            sees_structure = true;
            break;
        }
    }
    if (!sees_structure) {
        violations.push_back({"IC2", "structure is not in the camera's initial field of view"});
    }

    // A2: walls within sensing range of each other count as one structure;
    // any remaining separate group must keep a 2*range clearance, otherwise
    // the obstacle-free annulus around the structure is broken.
    const auto& walls = structure.walls();
    const int n = static_cast<int>(walls.size());
    std::vector<int> group(n);
    for (int i = 0; i < n; ++i) group[i] = i;
    const auto find = [&](int i) {
        while (group[i] != i) i = group[i] = group[group[i]];
        return i;
    };
    const auto segment_gap = [](const Wall& a, const Wall& b) {
        const auto seg_dist = [](const Vec2& p, const Vec2& q0, const Vec2& q1) {
            const Vec2 d = q1 - q0;
            const double len2 = d.squaredNorm();
            double t = len2 > 0.0 ? (p - q0).dot(d) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            return (p - (q0 + t * d)).norm();
        };
        double best = std::min({seg_dist(a.start, b.start, b.end), seg_dist(a.end, b.start, b.end),
                                seg_dist(b.start, a.start, a.end), seg_dist(b.end, a.start, a.end)});
        return std::max(0.0, best - 0.5 * (a.thickness + b.thickness));
    };
    std::vector<std::vector<double>> gap(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            gap[i][j] = segment_gap(walls[i], walls[j]);
            if (gap[i][j] <= camera.range) {
                const int a = find(i), b = find(j);
                if (a != b) group[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    double min_inter_group = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (find(i) != find(j)) min_inter_group = std::min(min_inter_group, gap[i][j]);
        }
    }
    if (min_inter_group < 2.0 * camera.range) {
        violations.push_back(
            {"A2", "a second wall group sits closer than twice the camera range"});
    }

    return violations;
}

}  // namespace structmap
