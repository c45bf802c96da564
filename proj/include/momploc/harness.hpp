// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_HARNESS_HPP
#define MOMPLOC_HARNESS_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "momploc/localization.hpp"
#include "momploc/scene.hpp"
#include "momploc/solver.hpp"
#include "momploc/training.hpp"

namespace momploc {

// One solver invocation per user: which algorithm and at which grid
// oversampling.
struct RunSpec {
    std::string method = "momp"; // "momp" or "omp"
    double k_res = 1.0;
};

struct ExperimentConfig {
    RoomScene scene;
    TrainingConfig training;
    UraGeometry rx_geom{6, 6};   // access point (receiver)
    UraGeometry tx_geom{3, 3};   // user device (transmitter)
    PulseShape pulse;
    std::vector<RunSpec> runs;
    SolverConfig solver;
    ClassifierConfig classifier;
    std::uint64_t rng_seed = 1;
    std::string out_dir = "out";
    int max_users = -1;          // < 0 runs every user in the scene
    double clock_offset_range_s = 100e-9;
    double fail_threshold = 0.5; // exit code 3 above this failure rate
    bool noiseless = false;      // zero-noise override
    bool snap_to_grid = false;   // snap ground-truth paths onto the grid

    void validate() const;
};

ExperimentConfig default_config();

// Parses a JSON config document; missing keys keep the defaults. Powers are
// given in dBm (the noise power additionally accepts "inf").
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct MetricsRow {
    int user = 0;
    int ap = 0;
    std::string method;
    double k_res = 0.0;
    double aoa_err_deg = 0.0;
    double aod_err_deg = 0.0;
    double loc_err_m = 0.0;
    double runtime_s = 0.0;
    bool failed = false;
    std::string error;
};

// Great-circle angle between two unit directions, in degrees.
double angular_error_deg(const UnitDirection& a, const UnitDirection& b);

// Full sweep: for every user, trace the scene, synthesize training frames,
// whiten, run every configured solver and localize. Failures are recorded
// per row and never abort the sweep. Rows come out ordered by user, then by
// run spec, independent of scheduling.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg);

struct RunSummary {
    std::string method;
    double k_res = 0.0;
    int rx_nx = 0, rx_ny = 0;
    int rows = 0;
    int failures = 0;
    double failure_rate = 0.0;
    double median_aoa_err_deg = 0.0;
    double median_aod_err_deg = 0.0;
    double median_loc_err_m = 0.0;
    double p90_loc_err_m = 0.0;
    double mean_runtime_s = 0.0;
    std::vector<double> loc_err_cdf; // sorted localization errors
};

// Per-(method, K_res) statistics; failed rows are excluded from the error
// quantiles and counted in the failure rate.
std::vector<RunSummary> summarize(const std::vector<MetricsRow>& rows, const ExperimentConfig& cfg);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
nlohmann::json summary_to_json(const std::vector<RunSummary>& summaries);

// Debug dump for one user: ground truth, observation, per-run estimates,
// labels and position fixes as one JSON document.
nlohmann::json trace_user(const ExperimentConfig& cfg, int user);

} // namespace momploc

#endif
