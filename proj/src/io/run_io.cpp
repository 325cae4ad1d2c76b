#include "structmap/io/run_io.hpp"

#include <cstdio>
#include <fstream>

namespace structmap {

using nlohmann::json;

void write_trajectory_csv(const std::string& path, std::span<const TrajectoryRow> rows) {
    std::ofstream out(path);
    if (!out) throw Error("write_trajectory_csv: cannot open " + path);
    out << "tick,true_x,true_y,true_yaw,est_x,est_y,est_yaw,cam_yaw,event\n";
    char line[256];
    for (const TrajectoryRow& r : rows) {
        std::snprintf(line, sizeof(line), "%lld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,",
                      static_cast<long long>(r.tick), r.true_pose.x, r.true_pose.y,
                      r.true_pose.yaw_robot, r.est_pose.x, r.est_pose.y, r.est_pose.yaw_robot,
                      r.est_pose.yaw_camera);
        out << line << r.event << "\n";
    }
}

void write_octree_csv(const std::string& path, const OccupancyOctree& octree) {
    std::ofstream out(path);
    if (!out) throw Error("write_octree_csv: cannot open " + path);
    out << "x,y,z,state,size_m\n";
    const double res = octree.resolution();
    char line[192];
    octree.for_each_region([&](const VoxelKey& lo, int level, VoxelState state) {
        if (state == VoxelState::Unknown || state == VoxelState::Mixed) return;
        const double size = res * std::pow(2.0, level);
        const double half = 0.5 * size;
        std::snprintf(line, sizeof(line), "%.4f,%.4f,%.4f,%s,%.3f\n", lo.x * res + half,
                      lo.y * res + half, lo.z * res + half, voxel_state_name(state), size);
        out << line;
    });
}

void write_frontiers_csv(const std::string& path, std::span<const FrontierVoxel> frontier) {
    std::ofstream out(path);
    if (!out) throw Error("write_frontiers_csv: cannot open " + path);
    out << "x,y,z,nx,ny,nz\n";
    char line[192];
    for (const FrontierVoxel& f : frontier) {
        std::snprintf(line, sizeof(line), "%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n", f.center.x(),
                      f.center.y(), f.center.z(), f.normal.x(), f.normal.y(), f.normal.z());
        out << line;
    }
}

json entrances_to_json(std::span<const CavityEntrance> entrances) {
    json arr = json::array();
    for (const CavityEntrance& e : entrances) {
        arr.push_back({{"centroid", {e.centroid.x(), e.centroid.y(), e.centroid.z()}},
                       {"voxel_count", e.voxel_keys.size()},
                       {"tau0", e.tau0},
                       {"tau1", e.tau1},
                       {"tau2", e.tau2},
                       {"explored", e.explored},
                       {"pruned", e.pruned},
                       {"delta_used", e.delta_used}});
    }
    return arr;
}

void write_entrances_json(const std::string& path, std::span<const CavityEntrance> entrances) {
    std::ofstream out(path);
    if (!out) throw Error("write_entrances_json: cannot open " + path);
    out << entrances_to_json(entrances).dump(2) << "\n";
}

json metrics_to_json(const MetricsReport& r) {
    return json{{"scenario", r.scenario},
                {"policy", r.policy},
                {"k", r.k},
                {"seed", r.seed},
                {"path_length_m", r.path_length_m},
                {"coverage", r.coverage},
                {"reference_size", r.reference_size},
                {"mu_m", r.mu_m},
                {"sigma_m", r.sigma_m},
                {"max_m", r.max_m},
                {"n_points", r.n_points},
                {"runtime_s", r.runtime_s},
                {"icp_converged", r.icp_converged},
                {"status", r.status}};
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("write_metrics_json: cannot open " + path);
    out << metrics_to_json(report).dump(2) << "\n";
}

namespace {

bool type_matches(const json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "integer") return v.is_number_integer() || v.is_number_unsigned();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    return false;
}

}  // namespace

std::vector<std::string> validate_against_schema(const json& value, const json& schema,
                                                 const std::string& where) {
    std::vector<std::string> errors;
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        if (!type_matches(value, type)) {
            errors.push_back(where + ": expected " + type);
            return errors;
        }
    }
    if (schema.contains("required") && value.is_object()) {
        for (const auto& key : schema["required"]) {
            if (!value.contains(key.get<std::string>())) {
                errors.push_back(where + ": missing required key '" + key.get<std::string>() +
                                 "'");
            }
        }
    }
    if (schema.contains("properties") && value.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items()) {
            if (value.contains(key)) {
                const auto nested = validate_against_schema(value[key], sub, where + "." + key);
                errors.insert(errors.end(), nested.begin(), nested.end());
            }
        }
    }
    if (schema.contains("items") && value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            const auto nested = validate_against_schema(value[i], schema["items"],
                                                        where + "[" + std::to_string(i) + "]");
            errors.insert(errors.end(), nested.begin(), nested.end());
        }
    }
    return errors;
}

}  // namespace structmap
