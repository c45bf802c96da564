// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "momploc/harness.hpp"

using namespace momploc;
using nlohmann::json;

namespace {

// Single-room experiment small enough for exhaustive solving. With
// snap_to_grid and noiseless set, the recovered support must coincide with
// the snapped ground truth and every metric collapses to zero.
ExperimentConfig oracle_config() {
    ExperimentConfig cfg = default_config();
    cfg.scene = RoomScene{};
    cfg.scene.boxes.push_back({Vector3d(0.0, 0.0, 0.0), Vector3d(4.0, 4.0, 3.0)});
    cfg.scene.aps.push_back(
        AccessPoint::wall_mounted(Vector3d(0.5, 1.0, 2.2), Vector3d::UnitX()));
    cfg.scene.users.push_back(Vector3d(3.0, 2.5, 1.2));

    cfg.training.m_frames = 12;
    cfg.training.m_tx_chains = 3;
    cfg.training.m_rx_chains = 4;
    cfg.training.q_symbols = 24;
    cfg.training.d_taps = 16;
    cfg.training.tx_power_w = 1.0;
    cfg.rx_geom = {4, 4};
    cfg.tx_geom = {3, 3};
    cfg.pulse = PulseShape{PulseKind::Sinc, 2.0e-9, 0.25};

    cfg.solver.mode = SolverMode::Exhaustive;
    cfg.solver.n_paths_max = 5; // LoS, ceiling, three front-side walls
    cfg.solver.residual_stop_ratio = 1e-18;

    // Generous thresholds keep the label set stable under snapping; the
    // oracle only needs both sides of the comparison to agree.
    cfg.classifier.r_az = 1.0;
    cfg.classifier.r_el = 0.95;

    cfg.runs = {{"momp", 2.0}};
    cfg.clock_offset_range_s = 2e-9;
    cfg.noiseless = true;
    cfg.snap_to_grid = true;
    return cfg;
}

// Noisy but tiny configuration for determinism and bookkeeping tests.
ExperimentConfig tiny_config() {
    ExperimentConfig cfg = oracle_config();
    cfg.scene.users.push_back(Vector3d(2.0, 1.5, 1.0));
    cfg.training.m_frames = 4;
    cfg.training.q_symbols = 16;
    cfg.training.d_taps = 8;
    cfg.training.noise_power_w = 1e-9;
    cfg.rx_geom = {2, 2};
    cfg.tx_geom = {2, 2};
    cfg.solver.mode = SolverMode::Alternating;
    cfg.solver.n_paths_max = 3;
    cfg.runs = {{"momp", 2.0}, {"omp", 1.0}};
    cfg.noiseless = false;
    cfg.snap_to_grid = false;
    return cfg;
}

// Wall-clock runtimes vary between repetitions; zero them before comparing.
std::vector<MetricsRow> without_runtimes(std::vector<MetricsRow> rows) {
    for (MetricsRow& r : rows)
        r.runtime_s = 0.0;
    return rows;
}

std::string csv_string(const std::vector<MetricsRow>& rows) {
    const std::string path = "/tmp/momploc_test_metrics.csv";
    write_metrics_csv(path, rows);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::remove(path.c_str());
    return ss.str();
}

} // namespace

TEST_CASE("harness: angular error examples") {
    const UnitDirection a{0.0, 0.0, 1.0};
    CHECK(angular_error_deg(a, a) == doctest::Approx(0.0));
    CHECK(angular_error_deg(a, UnitDirection{1.0, 0.0, 0.0}) == doctest::Approx(90.0));
    CHECK(angular_error_deg(a, UnitDirection{0.0, 0.0, -1.0}) == doctest::Approx(180.0));

    const UnitDirection b = UnitDirection::from_xy(std::sqrt(1.0 - 0.09), 0.0);
    // dot = z component 0.3
    CHECK(angular_error_deg(a, b) ==
          doctest::Approx(std::acos(0.3) * 180.0 / 3.14159265358979323846));
}

TEST_CASE("harness: parse_config keeps defaults for missing keys") {
    const ExperimentConfig cfg = parse_config(json::object());
    CHECK(cfg.training.m_frames == 32);
    CHECK(cfg.training.m_tx_chains == 3);
    CHECK(cfg.training.m_rx_chains == 6);
    CHECK(cfg.training.q_symbols == 96);
    CHECK(cfg.training.d_taps == 64);
    CHECK(cfg.training.tx_power_w == doctest::Approx(0.1));         // 20 dBm
    CHECK(cfg.training.noise_power_w == doctest::Approx(3.98107170553497e-12)); // -84 dBm
    CHECK(cfg.rx_geom.nx == 6);
    CHECK(cfg.tx_geom.nx == 3);
    CHECK(cfg.pulse.sample_period_s == doctest::Approx(5e-9));
    CHECK(cfg.rng_seed == 1);
    CHECK(cfg.clock_offset_range_s == doctest::Approx(100e-9));
    CHECK(cfg.scene.users.size() == 218);
    REQUIRE(cfg.runs.size() == 1);
    CHECK(cfg.runs[0].method == "momp");
    CHECK(cfg.runs[0].k_res == 128.0);
}

TEST_CASE("harness: parse_config reads powers in dBm") {
    json j;
    j["training"]["tx_power_dbm"] = 30.0;
    j["training"]["noise_power_dbm"] = 0.0;
    const ExperimentConfig cfg = parse_config(j);
    CHECK(cfg.training.tx_power_w == doctest::Approx(1.0));
    CHECK(cfg.training.noise_power_w == doctest::Approx(1e-3));

    json inf;
    inf["training"]["noise_power_dbm"] = "inf";
    CHECK(std::isinf(parse_config(inf).training.noise_power_w));
}

TEST_CASE("harness: parse_config rejects invalid documents") {
    json bad;
    bad["runs"] = json::array({{{"method", "bogus"}, {"k_res", 1.0}}});
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = json::object();
    bad["runs"] = json::array({{{"method", "momp"}, {"k_res", 0.5}}});
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = json::object();
    bad["solver"]["mode"] = "simulated-annealing";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = json::object();
    bad["pulse"]["kind"] = "gaussian";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);

    bad = json::object();
    bad["fail_threshold"] = 1.5;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("harness: load_config reports unreadable and malformed files") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
    const std::string path = "/tmp/momploc_bad_config.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_config(path), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("harness: summarize computes per-run statistics") {
    ExperimentConfig cfg = tiny_config();
    cfg.runs = {{"momp", 2.0}};

    std::vector<MetricsRow> rows;
    const double locs[3] = {1.0, 3.0, 2.0};
    for (int i = 0; i < 3; ++i) {
        MetricsRow r;
        r.user = i;
        r.method = "momp";
        r.k_res = 2.0;
        r.aoa_err_deg = 1.0 + i;
        r.aod_err_deg = 0.5;
        r.loc_err_m = locs[i];
        r.runtime_s = 2.0;
        rows.push_back(r);
    }
    MetricsRow failed;
    failed.user = 3;
    failed.method = "momp";
    failed.k_res = 2.0;
    failed.failed = true;
    rows.push_back(failed);

    const std::vector<RunSummary> s = summarize(rows, cfg);
    REQUIRE(s.size() == 1);
    CHECK(s[0].rows == 4);
    CHECK(s[0].failures == 1);
    CHECK(s[0].failure_rate == doctest::Approx(0.25));
    CHECK(s[0].median_aoa_err_deg == doctest::Approx(2.0));
    CHECK(s[0].median_loc_err_m == doctest::Approx(2.0));
    CHECK(s[0].p90_loc_err_m == doctest::Approx(2.8));
    CHECK(s[0].mean_runtime_s == doctest::Approx(2.0));
    REQUIRE(s[0].loc_err_cdf.size() == 3);
    CHECK(s[0].loc_err_cdf[0] == 1.0);
    CHECK(s[0].loc_err_cdf[2] == 3.0);
}

TEST_CASE("harness: metrics CSV layout") {
    std::vector<MetricsRow> rows(2);
    rows[0].user = 0;
    rows[0].ap = 1;
    rows[0].method = "momp";
    rows[0].k_res = 2.0;
    rows[0].aoa_err_deg = 0.25;
    rows[0].aod_err_deg = 0.5;
    rows[0].loc_err_m = 0.125;
    rows[0].runtime_s = 1.5;
    rows[1] = rows[0];
    rows[1].user = 1;
    rows[1].method = "omp";
    rows[1].failed = true;
    rows[1].aoa_err_deg = std::numeric_limits<double>::quiet_NaN();
    rows[1].aod_err_deg = std::numeric_limits<double>::quiet_NaN();
    rows[1].loc_err_m = std::numeric_limits<double>::quiet_NaN();

    const std::string csv = csv_string(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "user,ap,method,k_res,aoa_err_deg,aod_err_deg,loc_err_m,runtime_s,status");
    std::getline(in, line);
    CHECK(line == "0,1,momp,2,0.25,0.5,0.125,1.5,ok");
    std::getline(in, line);
    CHECK(line == "1,1,omp,2,nan,nan,nan,1.5,failed");
}

TEST_CASE("harness: snap-to-grid noiseless experiment closes exactly") {
    const ExperimentConfig cfg = oracle_config();
    const std::vector<MetricsRow> rows = run_experiment(cfg);

    REQUIRE(rows.size() == 1);
    const MetricsRow& r = rows[0];
    INFO("error: ", r.error);
    REQUIRE_FALSE(r.failed);
    CHECK(r.user == 0);
    CHECK(r.ap == 0);
    CHECK(r.aoa_err_deg < 1e-6);
    CHECK(r.aod_err_deg < 1e-6);
    CHECK(r.loc_err_m < 1e-6);
    CHECK(r.runtime_s > 0.0);
}

TEST_CASE("harness: runs are deterministic in the seed") {
    const ExperimentConfig cfg = tiny_config();
    const std::string a = csv_string(without_runtimes(run_experiment(cfg)));
    const std::string b = csv_string(without_runtimes(run_experiment(cfg)));
    CHECK(a == b);

    ExperimentConfig other = cfg;
    other.rng_seed = 2;
    CHECK(csv_string(without_runtimes(run_experiment(other))) != a);
}

TEST_CASE("harness: rows come out ordered by user then run spec") {
    const ExperimentConfig cfg = tiny_config();
    const std::vector<MetricsRow> rows = run_experiment(cfg);
    REQUIRE(rows.size() == 4); // 2 users x 2 runs
    CHECK(rows[0].user == 0);
    CHECK(rows[0].method == "momp");
    CHECK(rows[1].user == 0);
    CHECK(rows[1].method == "omp");
    CHECK(rows[2].user == 1);
    CHECK(rows[3].user == 1);
}

TEST_CASE("harness: max_users truncates the sweep") {
    ExperimentConfig cfg = tiny_config();
    cfg.max_users = 1;
    CHECK(run_experiment(cfg).size() == 2);
}

TEST_CASE("harness: infinite noise fails every row without crashing") {
    ExperimentConfig cfg = tiny_config();
    cfg.training.noise_power_w = std::numeric_limits<double>::infinity();
    const std::vector<MetricsRow> rows = run_experiment(cfg);
    REQUIRE_FALSE(rows.empty());
    for (const MetricsRow& r : rows) {
        CHECK(r.failed);
        CHECK_FALSE(r.error.empty());
    }
}

TEST_CASE("harness: trace_user dumps the full per-user picture") {
    const ExperimentConfig cfg = oracle_config();
    const json t = trace_user(cfg, 0);

    CHECK(t.contains("user"));
    CHECK(t.at("user") == 0);
    CHECK(t.contains("ap"));
    CHECK(t.contains("ground_truth_paths"));
    CHECK(t.contains("modeled_paths_global"));
    CHECK(t.contains("runs"));
    REQUIRE(t.at("runs").size() == cfg.runs.size());
    const json& run = t.at("runs")[0];
    CHECK(run.contains("estimate"));
    CHECK(run.contains("labels"));
    CHECK(run.contains("fix"));
    CHECK(run.contains("position_estimate"));
    CHECK(run.contains("loc_err_m"));
    CHECK(double(run.at("loc_err_m")) < 1e-6);

    CHECK_THROWS_AS(trace_user(cfg, 99), ConfigError);
}
