// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "momploc/harness.hpp"

namespace {

momploc::ExperimentConfig load(const std::string& config_path, bool has_seed, std::uint64_t seed,
                               const std::string& out_dir) {
    momploc::ExperimentConfig cfg = momploc::load_config(config_path);
    if (has_seed)
        cfg.rng_seed = seed;
    if (!out_dir.empty())
        cfg.out_dir = out_dir;
    return cfg;
}

int cmd_run(const momploc::ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::vector<momploc::MetricsRow> rows = momploc::run_experiment(cfg);
    momploc::write_metrics_csv(cfg.out_dir + "/metrics.csv", rows);

    const auto summaries = momploc::summarize(rows, cfg);
    std::ofstream sf(cfg.out_dir + "/summary.json");
    sf << momploc::summary_to_json(summaries).dump(2) << '\n';

    int failures = 0;
    for (const auto& r : rows)
        failures += r.failed ? 1 : 0;
    const double rate = rows.empty() ? 0.0 : double(failures) / double(rows.size());
    std::cout << rows.size() << " rows, " << failures << " failed (rate " << rate << ")\n";
    for (const auto& s : summaries)
        std::cout << s.method << " k_res=" << s.k_res << ": median AoA err " << s.median_aoa_err_deg
                  << " deg, median loc err " << s.median_loc_err_m << " m, mean runtime "
                  << s.mean_runtime_s << " s\n";
    return rate > cfg.fail_threshold ? 3 : 0;
}

int cmd_bench(momploc::ExperimentConfig cfg) {
    if (cfg.max_users < 0)
        cfg.max_users = 3;
    const std::vector<momploc::MetricsRow> rows = momploc::run_experiment(cfg);
    const auto summaries = momploc::summarize(rows, cfg);
    std::cout << "method,k_res,users,mean_runtime_s\n";
    for (const auto& s : summaries)
        std::cout << s.method << ',' << s.k_res << ',' << (s.rows - s.failures) << ','
                  << s.mean_runtime_s << '\n';
    return 0;
}

int cmd_trace(const momploc::ExperimentConfig& cfg, int user) {
    const nlohmann::json j = momploc::trace_user(cfg, user);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/trace_user_" + std::to_string(user) + ".json";
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"momploc: compressive mmWave channel estimation and localization"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int user = 0;

    CLI::App* run = app.add_subcommand("run", "run the full experiment sweep");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
        has_seed = true;
    });
    run->add_option("--out", out_dir, "output directory override");

    CLI::App* bench = app.add_subcommand("bench", "time the configured solvers on a few users");
    bench->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* trace = app.add_subcommand("trace", "dump one user's intermediate artifacts");
    trace->add_option("--config", config_path, "JSON config file")->required();
    trace->add_option("--user", user, "user index")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const momploc::ExperimentConfig cfg = load(config_path, has_seed, seed, out_dir);
        if (run->parsed())
            return cmd_run(cfg);
        if (bench->parsed())
            return cmd_bench(cfg);
        return cmd_trace(cfg, user);
    } catch (const momploc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
