#include "structmap/run/pipeline.hpp"

#include "structmap/geometry/ply.hpp"

#include <chrono>
#include <filesystem>

namespace structmap {

RunArtifacts run_policy(const Scenario& scenario, const std::string& policy) {
    if (policy != "proposed" && policy != "fbe") {
        throw Error("run_policy: unknown policy '" + policy + "'");
    }

    RunArtifacts art;
    art.scenario = scenario;
    art.policy = policy;

    const World world = World::from_scenario(scenario);
    art.state = std::make_unique<RunState>(scenario, scenario.start.robot_pose());

    const auto t0 = std::chrono::steady_clock::now();
    std::string status;
    if (policy == "proposed") {
        art.pe = run_pe(world, scenario, *art.state);
        if (!art.pe.violations.empty()) {
            art.exit_code = 2;
            art.failure = "scenario violation";
            for (const auto& v : art.pe.violations) art.failure += " " + v.code;
            return art;
        }
        status = "pe:" + art.pe.status;
        if (art.pe.completed) {
            art.ce = run_ce(world, scenario, *art.state, art.pe);
            status += ";ce:" + art.ce.status;
        } else {
            art.exit_code = 3;
            art.failure = "perimeter phase hit the tick cap";
        }
    } else {
        art.fbe = run_fbe(world, scenario, *art.state);
        if (!art.fbe.violations.empty()) {
            art.exit_code = 2;
            art.failure = "scenario violation";
            for (const auto& v : art.fbe.violations) art.failure += " " + v.code;
            return art;
        }
        status = "fbe:" + art.fbe.status;
        if (!art.fbe.completed) {
            art.exit_code = 3;
            art.failure = "frontier exploration hit the tick cap";
        }
    }
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    art.metrics = compute_metrics(scenario, policy, world, *art.state, status, runtime);
    return art;
}

void write_artifacts(const RunArtifacts& art, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    if (art.state) {
        write_trajectory_csv(path("trajectory.csv"), art.state->trajectory);
        write_ply(path("model.ply"), art.state->global_cloud);
        write_octree_csv(path("octree_leaves.csv"), art.state->octree);
        write_frontiers_csv(path("frontiers.csv"),
                            extract_frontier_voxels(art.state->octree));
    }
    write_entrances_json(path("entrances.json"), art.ce.entrances);
    write_metrics_json(path("metrics.json"), art.metrics);
}

}  // namespace structmap
