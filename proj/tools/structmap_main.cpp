#include "structmap/run/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using structmap::Scenario;

void apply_override(Scenario& scn, const std::string& key, double value) {
    if (key == "range") {
        scn.camera.range = value;
    } else if (key == "D") {
        scn.planner.distance = value;
    } else if (key == "d0") {
        scn.planner.d0 = value;
    } else if (key == "k") {
        scn.noise_k = value;
    } else if (key == "alpha") {
        scn.planner.alpha = value;
    } else if (key == "beta") {
        scn.planner.beta = value;
    } else if (key == "delta_min") {
        scn.planner.delta_min = value;
    } else {
        throw structmap::Error("unknown override key '" + key + "'");
    }
}

void validate_overrides(const Scenario& scn) {
    if (scn.camera.range <= 0.0) throw structmap::Error("range must be positive");
    if (scn.planner.distance <= 0.0 || scn.planner.distance >= scn.camera.range) {
        throw structmap::Error("D must satisfy 0 < D < range");
    }
    if (scn.noise_k < 0.0) throw structmap::Error("k must be >= 0");
    if (scn.planner.d0 < scn.planner.leaf) throw structmap::Error("d0 must be >= leaf size");
    if (scn.planner.alpha <= 0.0 || scn.planner.beta <= 0.0) {
        throw structmap::Error("alpha and beta must be positive");
    }
    if (scn.planner.delta_min <= 0.0 || scn.planner.delta_min > scn.planner.distance) {
        throw structmap::Error("delta_min must satisfy 0 < delta_min <= D");
    }
}

int run_once(Scenario scn, const std::string& policy, const std::string& out_dir,
             bool quiet = false) {
    const auto art = structmap::run_policy(scn, policy);
    structmap::write_artifacts(art, out_dir);
    if (art.exit_code != 0) {
        std::cerr << "structmap: " << art.failure << "\n";
    }
    if (!quiet) {
        std::printf(
            "%s policy=%s k=%.2f seed=%llu path=%.2fm coverage=%d/%d mu=%.3fm status=%s\n",
            scn.name.c_str(), policy.c_str(), scn.noise_k,
            static_cast<unsigned long long>(scn.seed), art.metrics.path_length_m,
            art.metrics.coverage, art.metrics.reference_size, art.metrics.mu_m,
            art.metrics.status.c_str());
    }
    return art.exit_code;
}

int run_sweep(const Scenario& base, const std::string& policy, const std::string& out_dir,
              const std::string& axis, const std::vector<double>& values) {
    if (values.empty()) {
        std::cerr << "structmap: sweep needs at least one value\n";
        return 1;
    }
    std::filesystem::create_directories(out_dir);
    std::ofstream table(out_dir + "/sweep.csv");
    table << "scenario,policy,axis,value,seed,perimeter_m,path_length_m,n_points,coverage,"
             "reference_size,mu_m,sigma_m,max_m,runtime_s,status\n";

    for (const double value : values) {
        for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
            Scenario scn = base;
            scn.seed = seed;
            std::string status = "ok";
            structmap::MetricsReport m;
            try {
                apply_override(scn, axis, value);
                validate_overrides(scn);
                char sub[128];
                std::snprintf(sub, sizeof(sub), "%s/%s_%s%g_s%llu", out_dir.c_str(),
                              scn.name.c_str(), axis.c_str(), value,
                              static_cast<unsigned long long>(seed));
                const auto art = structmap::run_policy(scn, policy);
                structmap::write_artifacts(art, sub);
                m = art.metrics;
                if (art.exit_code != 0) status = art.failure;
            } catch (const std::exception& e) {
                status = e.what();
            }
            char row[512];
            std::snprintf(row, sizeof(row),
                          "%s,%s,%s,%g,%llu,%.2f,%.3f,%d,%d,%d,%.4f,%.4f,%.4f,%.2f,",
                          scn.name.c_str(), policy.c_str(), axis.c_str(), value,
                          static_cast<unsigned long long>(seed), scn.perimeter,
                          m.path_length_m, m.n_points, m.coverage, m.reference_size, m.mu_m,
                          m.sigma_m, m.max_m, m.runtime_s);
            table << row << status << "\n";
            std::printf("sweep %s=%g seed=%llu: %s\n", axis.c_str(), value,
                        static_cast<unsigned long long>(seed), status.c_str());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Autonomous structure-mapping simulator: perimeter + cavity exploration "
                 "policies, a frontier-based baseline, and reconstruction metrics"};

    std::string scenario_path;
    std::string policy = "proposed";
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::vector<std::string> overrides;
    std::string sweep;

    app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    app.add_option("--policy", policy, "Exploration policy")
        ->check(CLI::IsMember({"proposed", "fbe"}));
    app.add_option("--seed", seed, "Random seed (overrides the scenario's)")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--set", overrides, "Override KEY=VALUE (range, D, d0, k, alpha, beta, delta_min)");
    app.add_option("--sweep", sweep, "Sweep AXIS=V1,V2,... over seeds {1,2,3}");

    CLI11_PARSE(app, argc, argv);

    try {
        Scenario scn = structmap::load_scenario(scenario_path);
        if (seed_given) scn.seed = seed;
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw structmap::Error("--set expects KEY=VALUE");
            apply_override(scn, kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
        }
        validate_overrides(scn);

        if (!sweep.empty()) {
            const auto eq = sweep.find('=');
            if (eq == std::string::npos) throw structmap::Error("--sweep expects AXIS=V1,V2,...");
            const std::string axis = sweep.substr(0, eq);
            std::vector<double> values;
            std::string rest = sweep.substr(eq + 1);
            std::size_t pos = 0;
            while (pos < rest.size()) {
                const auto comma = rest.find(',', pos);
                const std::string tok = rest.substr(pos, comma - pos);
                if (!tok.empty()) values.push_back(std::stod(tok));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            return run_sweep(scn, policy, out_dir, axis, values);
        }
        return run_once(scn, policy, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "structmap: " << e.what() << "\n";
        return 1;
    }
}
