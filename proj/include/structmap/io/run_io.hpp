#pragma once

#include "structmap/metrics/metrics.hpp"
#include "structmap/occupancy/frontier.hpp"
#include "structmap/planner/cavity.hpp"

#include <json.hpp>

#include <string>

namespace structmap {

/// Fixed-header per-tick trajectory log:
/// tick,true_x,true_y,true_yaw,est_x,est_y,est_yaw,cam_yaw,event
void write_trajectory_csv(const std::string& path, std::span<const TrajectoryRow> rows);

/// Leaf-voxel dump as maximal uniform regions: x,y,z,state,size_m (unknown
/// space omitted).
void write_octree_csv(const std::string& path, const OccupancyOctree& octree);

void write_frontiers_csv(const std::string& path, std::span<const FrontierVoxel> frontier);

nlohmann::json entrances_to_json(std::span<const CavityEntrance> entrances);
void write_entrances_json(const std::string& path, std::span<const CavityEntrance> entrances);

nlohmann::json metrics_to_json(const MetricsReport& report);
void write_metrics_json(const std::string& path, const MetricsReport& report);

/// Minimal JSON-schema checker covering the subset used by the shipped
/// schema: type, required, properties, items. Returns human-readable
/// violations, empty when valid.
std::vector<std::string> validate_against_schema(const nlohmann::json& value,
                                                 const nlohmann::json& schema,
                                                 const std::string& where = "$");

}  // namespace structmap
