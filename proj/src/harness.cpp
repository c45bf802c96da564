// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include "momploc/channel.hpp"
#include "momploc/serialize.hpp"

namespace momploc {

namespace {

double dbm_to_watts(double dbm) {
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double parse_power_dbm(const nlohmann::json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf")
            return std::numeric_limits<double>::infinity();
        throw ConfigError("power: expected a number in dBm or \"inf\"");
    }
    return dbm_to_watts(v.get<double>());
}

Vector3d parse_vec3(const nlohmann::json& v) {
    if (!v.is_array() || v.size() != 3)
        throw ConfigError("expected a 3-element array");
    return {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
}

RoomScene parse_scene(const nlohmann::json& j) {
    RoomScene s = default_scene();
    if (j.contains("rooms")) {
        s.boxes.clear();
        for (const auto& r : j.at("rooms"))
            s.boxes.push_back({parse_vec3(r.at("lo")), parse_vec3(r.at("hi"))});
    }
    if (j.contains("walls")) {
        s.walls.clear();
        for (const auto& w : j.at("walls")) {
            InteriorWall wall;
            wall.axis = w.at("axis").get<int>();
            wall.value = w.at("value").get<double>();
            wall.lo = parse_vec3(w.at("lo"));
            wall.hi = parse_vec3(w.at("hi"));
            if (w.contains("aperture"))
                wall.aperture =
                    Box{parse_vec3(w.at("aperture").at("lo")), parse_vec3(w.at("aperture").at("hi"))};
            s.walls.push_back(wall);
        }
    }
    if (j.contains("aps")) {
        s.aps.clear();
        for (const auto& a : j.at("aps"))
            s.aps.push_back(
                AccessPoint::wall_mounted(parse_vec3(a.at("position")), parse_vec3(a.at("boresight"))));
    }
    if (j.contains("users")) {
        s.users.clear();
        for (const auto& u : j.at("users"))
            s.users.push_back(parse_vec3(u));
    }
    s.carrier_wavelength_m = j.value("carrier_wavelength_m", s.carrier_wavelength_m);
    s.reflection_loss_db = j.value("reflection_loss_db", s.reflection_loss_db);
    s.clutter_paths = j.value("clutter_paths", s.clutter_paths);
    s.clutter_rel_power_db = j.value("clutter_rel_power_db", s.clutter_rel_power_db);
    return s;
}

double snap(const VectorXd& grid, double value) {
    double best = grid[0];
    double best_d = std::abs(value - best);
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        const double d = std::abs(value - grid[i]);
        if (d < best_d) {
            best_d = d;
            best = grid[i];
        }
    }
    return best;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

std::string format_metric(double v) {
    char buf[32];
    if (std::isnan(v))
        return "nan";
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

void ExperimentConfig::validate() const {
    training.validate();
    rx_geom.validate();
    tx_geom.validate();
    solver.validate();
    classifier.validate();
    if (runs.empty())
        throw ConfigError("ExperimentConfig: no runs configured");
    for (const RunSpec& r : runs) {
        if (r.method != "momp" && r.method != "omp")
            throw ConfigError("ExperimentConfig: unknown method '" + r.method + "'");
        if (r.k_res < 1.0)
            throw ConfigError("ExperimentConfig: k_res must be >= 1");
    }
    if (!(clock_offset_range_s > 0.0))
        throw ConfigError("ExperimentConfig: clock_offset_range_s must be > 0");
    if (fail_threshold < 0.0 || fail_threshold > 1.0)
        throw ConfigError("ExperimentConfig: fail_threshold must be in [0, 1]");
    if (training.d_taps < 1)
        throw ConfigError("ExperimentConfig: d_taps must be >= 1");
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.scene = default_scene();
    cfg.training.m_frames = 32;
    cfg.training.m_tx_chains = 3;
    cfg.training.m_rx_chains = 6;
    cfg.training.q_symbols = 96;
    cfg.training.d_taps = 64;
    cfg.training.tx_power_w = dbm_to_watts(20.0);
    cfg.training.noise_power_w = dbm_to_watts(-84.0);
    cfg.rx_geom = {6, 6};
    cfg.tx_geom = {3, 3};
    cfg.pulse.kind = PulseKind::Sinc;
    cfg.pulse.sample_period_s = 5e-9;
    cfg.runs = {{"momp", 128.0}};
    return cfg;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg = default_config();
    if (j.contains("scene"))
        cfg.scene = parse_scene(j.at("scene"));

    if (j.contains("training")) {
        const auto& t = j.at("training");
        cfg.training.m_frames = t.value("m_frames", cfg.training.m_frames);
        cfg.training.m_tx_chains = t.value("m_tx_chains", cfg.training.m_tx_chains);
        cfg.training.m_rx_chains = t.value("m_rx_chains", cfg.training.m_rx_chains);
        cfg.training.q_symbols = t.value("q_symbols", cfg.training.q_symbols);
        cfg.training.d_taps = t.value("d_taps", cfg.training.d_taps);
        if (t.contains("tx_power_dbm"))
            cfg.training.tx_power_w = parse_power_dbm(t.at("tx_power_dbm"));
        if (t.contains("noise_power_dbm"))
            cfg.training.noise_power_w = parse_power_dbm(t.at("noise_power_dbm"));
    }
    if (j.contains("rx_array")) {
        cfg.rx_geom.nx = j.at("rx_array").value("nx", cfg.rx_geom.nx);
        cfg.rx_geom.ny = j.at("rx_array").value("ny", cfg.rx_geom.ny);
        cfg.rx_geom.spacing_wavelengths =
            j.at("rx_array").value("spacing_wavelengths", cfg.rx_geom.spacing_wavelengths);
    }
    if (j.contains("tx_array")) {
        cfg.tx_geom.nx = j.at("tx_array").value("nx", cfg.tx_geom.nx);
        cfg.tx_geom.ny = j.at("tx_array").value("ny", cfg.tx_geom.ny);
        cfg.tx_geom.spacing_wavelengths =
            j.at("tx_array").value("spacing_wavelengths", cfg.tx_geom.spacing_wavelengths);
    }
    if (j.contains("pulse")) {
        const auto& p = j.at("pulse");
        const std::string kind = p.value("kind", std::string("sinc"));
        if (kind == "sinc")
            cfg.pulse.kind = PulseKind::Sinc;
        else if (kind == "raised_cosine" || kind == "rc")
            cfg.pulse.kind = PulseKind::RaisedCosine;
        else
            throw ConfigError("pulse.kind: unknown kind '" + kind + "'");
        cfg.pulse.sample_period_s = p.value("sample_period_s", cfg.pulse.sample_period_s);
        cfg.pulse.rolloff = p.value("rolloff", cfg.pulse.rolloff);
    }
    if (j.contains("runs")) {
        cfg.runs.clear();
        for (const auto& r : j.at("runs"))
            cfg.runs.push_back({r.at("method").get<std::string>(), r.at("k_res").get<double>()});
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cfg.solver.n_paths_max = s.value("n_paths_max", cfg.solver.n_paths_max);
        cfg.solver.refine_sweeps = s.value("refine_sweeps", cfg.solver.refine_sweeps);
        cfg.solver.residual_stop_ratio =
            s.value("residual_stop_ratio", cfg.solver.residual_stop_ratio);
        cfg.solver.parallel = s.value("parallel", cfg.solver.parallel);
        const std::string mode = s.value("mode", std::string("alternating"));
        if (mode == "alternating")
            cfg.solver.mode = SolverMode::Alternating;
        else if (mode == "exhaustive")
            cfg.solver.mode = SolverMode::Exhaustive;
        else
            throw ConfigError("solver.mode: unknown mode '" + mode + "'");
    }
    if (j.contains("classifier")) {
        cfg.classifier.r_az = j.at("classifier").value("r_az", cfg.classifier.r_az);
        cfg.classifier.r_el = j.at("classifier").value("r_el", cfg.classifier.r_el);
        cfg.classifier.printed_equation_mapping = j.at("classifier")
                                                      .value("printed_equation_mapping",
                                                             cfg.classifier.printed_equation_mapping);
    }
    cfg.rng_seed = j.value("seed", cfg.rng_seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.max_users = j.value("max_users", cfg.max_users);
    cfg.clock_offset_range_s = j.value("clock_offset_range_s", cfg.clock_offset_range_s);
    cfg.fail_threshold = j.value("fail_threshold", cfg.fail_threshold);
    cfg.noiseless = j.value("noiseless", cfg.noiseless);
    cfg.snap_to_grid = j.value("snap_to_grid", cfg.snap_to_grid);
    cfg.validate();
    cfg.scene.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

double angular_error_deg(const UnitDirection& a, const UnitDirection& b) {
    const double dot = std::clamp(a.vec().dot(b.vec()), -1.0, 1.0);
    return std::acos(dot) * 180.0 / std::numbers::pi;
}

namespace {

// Per-user experiment state shared across the run specs.
struct UserContext {
    int user = 0;
    GroundTruth gt;
    std::vector<Path> local;   // AP/user array frames, observed delays
    std::vector<Path> truth;   // same paths, global-frame arrival directions
    Vector3d position_truth = Vector3d::Zero();
    std::size_t main_path = 0; // strongest ground-truth path
    Observation obs;
};

MetricsRow failed_row(int user, int ap, const RunSpec& run, const std::string& what) {
    MetricsRow row;
    row.user = user;
    row.ap = ap;
    row.method = run.method;
    row.k_res = run.k_res;
    row.aoa_err_deg = std::numeric_limits<double>::quiet_NaN();
    row.aod_err_deg = std::numeric_limits<double>::quiet_NaN();
    row.loc_err_m = std::numeric_limits<double>::quiet_NaN();
    row.runtime_s = 0.0;
    row.failed = true;
    row.error = what;
    return row;
}

// Trace the scene for one user and synthesize the whitened observation.
// Paths leaving the back side of either array are dropped; observed delays
// absorb the clock offset so the sparse model's [0, D*Ts) window applies.
UserContext prepare_user(const ExperimentConfig& cfg, int user, const DictionarySet& snap_set) {
    UserContext ctx;
    ctx.user = user;
    ctx.gt = make_ground_truth(cfg.scene, user, cfg.rng_seed, cfg.clock_offset_range_s);
    const Eigen::Matrix3d& rot = cfg.scene.aps[size_t(ctx.gt.ap)].orientation;

    for (const Path& p : ctx.gt.paths) {
        const Vector3d aoa_local = rot * p.aoa.vec();
        if (aoa_local.z() < 0.0 || p.aod.z < 0.0)
            continue;
        Path lp;
        lp.gain = p.gain;
        lp.delay_s = p.delay_s + ctx.gt.clock_offset_s;
        lp.aoa = UnitDirection::from_vec(aoa_local);
        lp.aod = p.aod;
        ctx.local.push_back(lp);
    }
    if (ctx.local.empty())
        throw ConfigError("no front-side paths between user and access point");

    if (cfg.snap_to_grid) {
        for (Path& lp : ctx.local) {
            const double x = snap(snap_set.grids[0], lp.aoa.x);
            const double y = snap(snap_set.grids[1], lp.aoa.y);
            lp.aoa = UnitDirection::from_xy(x, y);
            const double dx = snap(snap_set.grids[2], lp.aod.x);
            const double dy = snap(snap_set.grids[3], lp.aod.y);
            lp.aod = UnitDirection::from_xy(dx, dy);
            lp.delay_s = snap(snap_set.grids[4], lp.delay_s);
        }
    }

    for (const Path& lp : ctx.local) {
        Path tp = lp;
        tp.aoa = UnitDirection::from_vec(rot.transpose() * lp.aoa.vec());
        ctx.truth.push_back(tp);
    }
    ctx.main_path = 0;
    for (std::size_t i = 1; i < ctx.truth.size(); ++i)
        if (std::abs(ctx.truth[i].gain) > std::abs(ctx.truth[ctx.main_path].gain))
            ctx.main_path = i;

    ctx.position_truth = ctx.gt.position;
    if (cfg.snap_to_grid) {
        // The snapped scene is no longer geometrically exact; the reference
        // position is re-derived from the snapped paths so the end-to-end
        // oracle closes.
        std::vector<PathLabel> labels;
        for (const Path& tp : ctx.truth)
            labels.push_back(classify(tp, cfg.classifier));
        const PositionFix fix = solve_position(ctx.truth, labels, weights_from_gains(ctx.truth));
        ctx.position_truth = cfg.scene.aps[size_t(ctx.gt.ap)].position + fix.u;
    }
    return ctx;
}

void synthesize_observation(const ExperimentConfig& cfg, UserContext& ctx,
                            const std::vector<TrainingFrame>& frames,
                            const TrainingConfig& train) {
    const ChannelTensor h =
        build_channel(ctx.local, cfg.rx_geom, cfg.tx_geom, cfg.pulse, train.d_taps, 0.0);
    Rng noise_rng = Rng(cfg.rng_seed).substream(mix_seed(0x5eedULL, std::uint64_t(ctx.user)));
    std::vector<MatrixXcd> received(frames.size());
    for (std::size_t m = 0; m < frames.size(); ++m) {
        Rng frame_rng = noise_rng.substream(m);
        received[m] = whiten(frames[m], simulate_rx(h, frames[m], train, frame_rng));
    }
    ctx.obs = assemble_observation(frames, received);
}

MetricsRow run_one(const ExperimentConfig& cfg, const UserContext& ctx, const RunSpec& run,
                   const SensingTensor& phi, const DictionarySet& set) {
    using clock = std::chrono::steady_clock;

    const auto t0 = clock::now();
    SparseEstimate est;
    if (run.method == "momp") {
        est = momp_solve(ctx.obs, phi, set, cfg.solver);
    } else {
        est = omp_solve(ctx.obs, phi, set, cfg.solver);
    }
    const double runtime = std::chrono::duration<double>(clock::now() - t0).count();

    MetricsRow row;
    row.ap = ctx.gt.ap;
    row.method = run.method;
    row.k_res = run.k_res;
    row.runtime_s = runtime;

    const ExtractedPaths ex = extract_paths(est, set);
    if (ex.paths.empty()) {
        MetricsRow f = failed_row(0, ctx.gt.ap, run, "no paths recovered");
        f.runtime_s = runtime;
        return f;
    }

    const Eigen::Matrix3d& rot = cfg.scene.aps[size_t(ctx.gt.ap)].orientation;
    std::vector<Path> global;
    global.reserve(ex.paths.size());
    for (const Path& p : ex.paths) {
        Path gp = p;
        gp.aoa = UnitDirection::from_vec(rot.transpose() * p.aoa.vec());
        global.push_back(gp);
    }

    std::size_t est_main = 0;
    for (std::size_t i = 1; i < global.size(); ++i)
        if (std::abs(global[i].gain) > std::abs(global[est_main].gain))
            est_main = i;

    const Path& gt_main = ctx.truth[ctx.main_path];
    row.aoa_err_deg = angular_error_deg(global[est_main].aoa, gt_main.aoa);
    row.aod_err_deg = angular_error_deg(global[est_main].aod, gt_main.aod);

    std::vector<PathLabel> labels;
    labels.reserve(global.size());
    for (const Path& p : global)
        labels.push_back(classify(p, cfg.classifier));
    try {
        const PositionFix fix = solve_position(global, labels, weights_from_gains(global));
        const Vector3d u_est = cfg.scene.aps[size_t(ctx.gt.ap)].position + fix.u;
        row.loc_err_m = (u_est - ctx.position_truth).norm();
    } catch (const UnlocalizableError& e) {
        MetricsRow f = failed_row(0, ctx.gt.ap, run, e.what());
        f.runtime_s = runtime;
        f.aoa_err_deg = row.aoa_err_deg;
        f.aod_err_deg = row.aod_err_deg;
        return f;
    }
    return row;
}

} // namespace

std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    cfg.scene.validate();

    TrainingConfig train = cfg.training;
    train.rng_seed = cfg.rng_seed;
    if (cfg.noiseless)
        train.noise_power_w = 0.0;

    const std::vector<TrainingFrame> frames = make_training_frames(train, cfg.tx_geom, cfg.rx_geom);
    const SensingTensor phi = build_sensing(frames, train, cfg.tx_geom, cfg.rx_geom);

    std::map<double, DictionarySet> dicts;
    for (const RunSpec& r : cfg.runs) {
        if (!dicts.count(r.k_res)) {
            DictionaryConfig dc{r.k_res, train.d_taps, cfg.pulse.sample_period_s, cfg.rx_geom,
                                cfg.tx_geom};
            dicts.emplace(r.k_res, build_dictionaries(dc, cfg.pulse));
        }
    }
    const DictionarySet& snap_set = dicts.at(cfg.runs[0].k_res);

    const int n_users = (cfg.max_users < 0)
                            ? int(cfg.scene.users.size())
                            : std::min<int>(cfg.max_users, int(cfg.scene.users.size()));
    const std::size_t n_runs = cfg.runs.size();
    std::vector<MetricsRow> rows(std::size_t(n_users) * n_runs);

#pragma omp parallel for schedule(dynamic)
    for (int user = 0; user < n_users; ++user) {
        MetricsRow* out = rows.data() + std::size_t(user) * n_runs;
        try {
            UserContext ctx = prepare_user(cfg, user, snap_set);
            synthesize_observation(cfg, ctx, frames, train);
            if (!ctx.obs.y.allFinite()) {
                for (std::size_t r = 0; r < n_runs; ++r)
                    out[r] = failed_row(user, ctx.gt.ap, cfg.runs[r], "non-finite observation");
                continue;
            }
            for (std::size_t r = 0; r < n_runs; ++r) {
                try {
                    out[r] = run_one(cfg, ctx, cfg.runs[r], phi, dicts.at(cfg.runs[r].k_res));
                    out[r].user = user;
                } catch (const std::exception& e) {
                    out[r] = failed_row(user, ctx.gt.ap, cfg.runs[r], e.what());
                }
            }
        } catch (const std::exception& e) {
            for (std::size_t r = 0; r < n_runs; ++r)
                out[r] = failed_row(user, -1, cfg.runs[r], e.what());
        }
    }
    return rows;
}

std::vector<RunSummary> summarize(const std::vector<MetricsRow>& rows,
                                  const ExperimentConfig& cfg) {
    std::vector<RunSummary> out;
    for (const RunSpec& run : cfg.runs) {
        RunSummary s;
        s.method = run.method;
        s.k_res = run.k_res;
        s.rx_nx = cfg.rx_geom.nx;
        s.rx_ny = cfg.rx_geom.ny;
        std::vector<double> aoa, aod, loc;
        double runtime_sum = 0.0;
        int runtime_n = 0;
        for (const MetricsRow& r : rows) {
            if (r.method != run.method || r.k_res != run.k_res)
                continue;
            ++s.rows;
            if (r.failed) {
                ++s.failures;
                continue;
            }
            aoa.push_back(r.aoa_err_deg);
            aod.push_back(r.aod_err_deg);
            loc.push_back(r.loc_err_m);
            runtime_sum += r.runtime_s;
            ++runtime_n;
        }
        s.failure_rate = s.rows ? double(s.failures) / double(s.rows) : 0.0;
        s.median_aoa_err_deg = quantile(aoa, 0.5);
        s.median_aod_err_deg = quantile(aod, 0.5);
        s.median_loc_err_m = quantile(loc, 0.5);
        s.p90_loc_err_m = quantile(loc, 0.9);
        s.mean_runtime_s = runtime_n ? runtime_sum / runtime_n : 0.0;
        std::sort(loc.begin(), loc.end());
        s.loc_err_cdf = std::move(loc);
        out.push_back(std::move(s));
    }
    return out;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open output file: " + path);
    out << "user,ap,method,k_res,aoa_err_deg,aod_err_deg,loc_err_m,runtime_s,status\n";
    for (const MetricsRow& r : rows) {
        out << r.user << ',' << r.ap << ',' << r.method << ',' << format_metric(r.k_res) << ','
            << format_metric(r.aoa_err_deg) << ',' << format_metric(r.aod_err_deg) << ','
            << format_metric(r.loc_err_m) << ',' << format_metric(r.runtime_s) << ','
            << (r.failed ? "failed" : "ok") << '\n';
    }
}

nlohmann::json summary_to_json(const std::vector<RunSummary>& summaries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RunSummary& s : summaries) {
        arr.push_back({{"method", s.method},
                       {"k_res", s.k_res},
                       {"rx_array", {s.rx_nx, s.rx_ny}},
                       {"rows", s.rows},
                       {"failures", s.failures},
                       {"failure_rate", s.failure_rate},
                       {"median_aoa_err_deg", s.median_aoa_err_deg},
                       {"median_aod_err_deg", s.median_aod_err_deg},
                       {"median_loc_err_m", s.median_loc_err_m},
                       {"p90_loc_err_m", s.p90_loc_err_m},
                       {"mean_runtime_s", s.mean_runtime_s},
                       {"loc_err_cdf", s.loc_err_cdf}});
    }
    return {{"runs", arr}};
}

nlohmann::json trace_user(const ExperimentConfig& cfg, int user) {
    cfg.validate();
    cfg.scene.validate();
    if (user < 0 || user >= int(cfg.scene.users.size()))
        throw ConfigError("trace: user index out of range");

    TrainingConfig train = cfg.training;
    train.rng_seed = cfg.rng_seed;
    if (cfg.noiseless)
        train.noise_power_w = 0.0;

    const std::vector<TrainingFrame> frames = make_training_frames(train, cfg.tx_geom, cfg.rx_geom);
    const SensingTensor phi = build_sensing(frames, train, cfg.tx_geom, cfg.rx_geom);
    const DictionaryConfig dc{cfg.runs[0].k_res, train.d_taps, cfg.pulse.sample_period_s,
                              cfg.rx_geom, cfg.tx_geom};
    const DictionarySet snap_set = build_dictionaries(dc, cfg.pulse);

    UserContext ctx = prepare_user(cfg, user, snap_set);
    synthesize_observation(cfg, ctx, frames, train);

    nlohmann::json j;
    j["user"] = user;
    j["ap"] = ctx.gt.ap;
    j["position"] = {ctx.gt.position.x(), ctx.gt.position.y(), ctx.gt.position.z()};
    j["clock_offset_s"] = ctx.gt.clock_offset_s;
    j["ground_truth_paths"] = paths_to_json(ctx.gt.paths);
    j["modeled_paths_global"] = paths_to_json(ctx.truth);
    j["observation_energy"] = ctx.obs.y.squaredNorm();

    nlohmann::json runs = nlohmann::json::array();
    for (const RunSpec& run : cfg.runs) {
        DictionaryConfig rdc{run.k_res, train.d_taps, cfg.pulse.sample_period_s, cfg.rx_geom,
                             cfg.tx_geom};
        const DictionarySet set = build_dictionaries(rdc, cfg.pulse);
        nlohmann::json rj;
        rj["method"] = run.method;
        rj["k_res"] = run.k_res;
        try {
            const SparseEstimate est = (run.method == "momp")
                                           ? momp_solve(ctx.obs, phi, set, cfg.solver)
                                           : omp_solve(ctx.obs, phi, set, cfg.solver);
            rj["estimate"] = estimate_to_json(est);
            const ExtractedPaths ex = extract_paths(est, set);
            const Eigen::Matrix3d& rot = cfg.scene.aps[size_t(ctx.gt.ap)].orientation;
            std::vector<Path> global;
            std::vector<PathLabel> labels;
            for (const Path& p : ex.paths) {
                Path gp = p;
                gp.aoa = UnitDirection::from_vec(rot.transpose() * p.aoa.vec());
                global.push_back(gp);
            }
            for (const Path& p : global)
                labels.push_back(classify(p, cfg.classifier));
            rj["recovered_paths_global"] = paths_to_json(global);
            nlohmann::json lbl = nlohmann::json::array();
            for (PathLabel l : labels)
                lbl.push_back(to_string(l));
            rj["labels"] = lbl;
            const PositionFix fix = solve_position(global, labels, weights_from_gains(global));
            rj["fix"] = fix_to_json(fix);
            const Vector3d u_est = cfg.scene.aps[size_t(ctx.gt.ap)].position + fix.u;
            rj["position_estimate"] = {u_est.x(), u_est.y(), u_est.z()};
            rj["loc_err_m"] = (u_est - ctx.position_truth).norm();
        } catch (const std::exception& e) {
            rj["error"] = e.what();
        }
        runs.push_back(std::move(rj));
    }
    j["runs"] = std::move(runs);
    return j;
}

} // namespace momploc
