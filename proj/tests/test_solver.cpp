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

#include <algorithm>
#include <complex>

#include "momploc/channel.hpp"
#include "momploc/rng.hpp"
#include "momploc/solver.hpp"

using namespace momploc;

namespace {

// Tiny end-to-end problem: 2x2 arrays, 3 delay taps, 4 training frames.
struct TinyProblem {
    TrainingConfig tcfg;
    UraGeometry rx{2, 2};
    UraGeometry tx{2, 2};
    PulseShape pulse;
    std::vector<TrainingFrame> frames;
    SensingTensor phi;
    DictionarySet set;

    TinyProblem() {
        tcfg.m_frames = 4;
        tcfg.m_tx_chains = 2;
        tcfg.m_rx_chains = 2;
        tcfg.q_symbols = 8;
        tcfg.d_taps = 3;
        tcfg.tx_power_w = 1.0;
        pulse = PulseShape{PulseKind::Sinc, 2.0e-9, 0.25};
        frames = make_training_frames(tcfg, tx, rx);
        phi = build_sensing(frames, tcfg, tx, rx);

        DictionaryConfig dcfg;
        dcfg.k_res = 1.0;
        dcfg.d_taps = tcfg.d_taps;
        dcfg.sample_period_s = pulse.sample_period_s;
        dcfg.rx_geom = rx;
        dcfg.tx_geom = tx;
        set = build_dictionaries(dcfg, pulse);
    }

    // Noiseless observation of on-grid paths placed at the given atoms.
    Observation observe(const std::vector<MultiIndex>& atoms_j,
                        const std::vector<cplx>& gains) const {
        std::vector<Path> paths;
        for (std::size_t i = 0; i < atoms_j.size(); ++i) {
            const Atom a = atom(set, atoms_j[i]);
            Path p;
            p.gain = gains[i];
            p.delay_s = a.delay_s;
            p.aoa = UnitDirection::from_xy(a.aoa_x, a.aoa_y);
            p.aod = UnitDirection::from_xy(a.aod_x, a.aod_y);
            paths.push_back(p);
        }
        const ChannelTensor h = build_channel(paths, rx, tx, pulse, tcfg.d_taps, 0.0);
        return Observation{phi.apply(h), tcfg.m_frames, tcfg.m_rx_chains, tcfg.q_symbols};
    }

    Observation random_observation(std::uint64_t seed) const {
        Rng rng(seed);
        VectorXcd y(phi.rows());
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y[i] = rng.complex_gaussian(1.0);
        return Observation{y, tcfg.m_frames, tcfg.m_rx_chains, tcfg.q_symbols};
    }
};

VectorXcd kron_vec(const VectorXcd& a, const VectorXcd& b) {
    VectorXcd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}


} // namespace

TEST_CASE("solver: measured_atom matches the dense flattened column") {
    const TinyProblem tp;
    const MatrixXcd dense = tp.phi.materialize_dense();

    const MultiIndex js[] = {{0, 0, 0, 0, 0}, {1, 0, 1, 1, 2}, {0, 1, 1, 0, 1}};
    for (const MultiIndex& j : js) {
        const Atom a = atom(tp.set, j);
        VectorXcd atom_vec = a.factors[0];
        for (int k = 1; k < 5; ++k)
            atom_vec = kron_vec(atom_vec, a.factors[size_t(k)]);
        const VectorXcd direct = dense * atom_vec;
        const VectorXcd fast = measured_atom(tp.phi, tp.set, j);
        CHECK((direct - fast).norm() < 1e-10 * direct.norm());
    }
}

TEST_CASE("solver: one on-grid path observes as gain times its measured atom") {
    const TinyProblem tp;
    const MultiIndex j{1, 1, 1, 1, 1};
    const cplx gain{0.8, -0.3};
    const Observation y = tp.observe({j}, {gain});

    const VectorXcd expect = gain * measured_atom(tp.phi, tp.set, j);
    CHECK((y.y - expect).norm() < 1e-10 * expect.norm());
}

TEST_CASE("solver: serial and parallel scoring are bitwise identical") {
    const TinyProblem tp;
    const Observation y = tp.random_observation(7);

    const VectorXd serial = score_all_atoms(tp.phi, tp.set, y.y, false);
    const VectorXd parallel = score_all_atoms(tp.phi, tp.set, y.y, true);
    REQUIRE(serial.size() == parallel.size());
    for (Eigen::Index i = 0; i < serial.size(); ++i)
        CHECK(serial[i] == parallel[i]);
}

TEST_CASE("solver: exhaustive MOMP recovers a single on-grid path exactly") {
    const TinyProblem tp;
    const MultiIndex j{1, 1, 0, 1, 2};
    const cplx gain{1.2, 0.5};
    const Observation y = tp.observe({j}, {gain});

    SolverConfig cfg;
    cfg.mode = SolverMode::Exhaustive;
    cfg.n_paths_max = 3;
    const SparseEstimate est = momp_solve(y, tp.phi, tp.set, cfg);

    REQUIRE(est.support.size() == 1);
    CHECK(est.support[0] == j);
    CHECK(std::abs(est.coeffs[0] - gain) < 1e-9);
    CHECK(est.residual_energy < 1e-18 * y.y.squaredNorm());
}

TEST_CASE("solver: exhaustive MOMP recovers two on-grid paths") {
    const TinyProblem tp;
    const std::vector<MultiIndex> truth{{1, 1, 1, 1, 0}, {0, 1, 1, 0, 2}};
    const std::vector<cplx> gains{cplx{1.0, 0.0}, cplx{0.0, 0.6}};
    const Observation y = tp.observe(truth, gains);

    SolverConfig cfg;
    cfg.mode = SolverMode::Exhaustive;
    cfg.n_paths_max = 4;
    cfg.residual_stop_ratio = 1e-16;
    const SparseEstimate est = momp_solve(y, tp.phi, tp.set, cfg);

    REQUIRE(est.support.size() == 2);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        const auto it = std::find(est.support.begin(), est.support.end(), truth[t]);
        REQUIRE(it != est.support.end());
        const auto idx = Eigen::Index(it - est.support.begin());
        CHECK(std::abs(est.coeffs[idx] - gains[t]) < 1e-8);
    }
    CHECK(est.residual_energy < 1e-16 * y.y.squaredNorm());
}

TEST_CASE("solver: alternating MOMP matches exhaustive on on-grid paths") {
    const TinyProblem tp;
    const std::vector<MultiIndex> truth{{1, 1, 1, 1, 0}, {0, 1, 1, 0, 2}};
    const std::vector<cplx> gains{cplx{1.0, 0.0}, cplx{0.0, 0.6}};
    const Observation y = tp.observe(truth, gains);

    SolverConfig cfg;
    cfg.mode = SolverMode::Alternating;
    cfg.n_paths_max = 4;
    cfg.residual_stop_ratio = 1e-16;
    const SparseEstimate est = momp_solve(y, tp.phi, tp.set, cfg);

    REQUIRE(est.support.size() == 2);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        const auto it = std::find(est.support.begin(), est.support.end(), truth[t]);
        REQUIRE(it != est.support.end());
        const auto idx = Eigen::Index(it - est.support.begin());
        CHECK(std::abs(est.coeffs[idx] - gains[t]) < 1e-8);
    }
}

TEST_CASE("solver: zero observation yields an empty estimate") {
    const TinyProblem tp;
    const Observation y{VectorXcd::Zero(tp.phi.rows()), tp.tcfg.m_frames, tp.tcfg.m_rx_chains,
                        tp.tcfg.q_symbols};

    SolverConfig cfg;
    for (SolverMode mode : {SolverMode::Alternating, SolverMode::Exhaustive}) {
        cfg.mode = mode;
        const SparseEstimate est = momp_solve(y, tp.phi, tp.set, cfg);
        CHECK(est.support.empty());
        CHECK(est.coeffs.size() == 0);
        CHECK(est.residual_energy == 0.0);
    }
}

TEST_CASE("solver: flattened OMP equals exhaustive MOMP") {
    const TinyProblem tp;
    const Observation y = tp.random_observation(11);

    SolverConfig momp_cfg;
    momp_cfg.mode = SolverMode::Exhaustive;
    momp_cfg.n_paths_max = 3;
    momp_cfg.residual_stop_ratio = 0.0;
    const SparseEstimate a = momp_solve(y, tp.phi, tp.set, momp_cfg);

    SolverConfig omp_cfg = momp_cfg;
    const SparseEstimate b = omp_solve(y, tp.phi, tp.set, omp_cfg);

    REQUIRE(a.support.size() == b.support.size());
    for (std::size_t i = 0; i < a.support.size(); ++i)
        CHECK(a.support[i] == b.support[i]);
    CHECK((a.coeffs - b.coeffs).norm() < 1e-10);
    CHECK(a.residual_energy == doctest::Approx(b.residual_energy));
}

TEST_CASE("solver: streamed OMP equals materialized OMP") {
    const TinyProblem tp;
    const Observation y = tp.random_observation(13);

    SolverConfig cfg;
    cfg.n_paths_max = 3;
    cfg.residual_stop_ratio = 0.0;
    const SparseEstimate mat = omp_solve(y, tp.phi, tp.set, cfg);

    cfg.omp_memory_budget_bytes = 0; // force the streaming path
    const SparseEstimate str = omp_solve(y, tp.phi, tp.set, cfg);

    REQUIRE(mat.support.size() == str.support.size());
    for (std::size_t i = 0; i < mat.support.size(); ++i)
        CHECK(mat.support[i] == str.support[i]);
    CHECK((mat.coeffs - str.coeffs).norm() < 1e-9);
}

TEST_CASE("solver: residual shrinks monotonically and ends orthogonal to the support") {
    const TinyProblem tp;
    const Observation y = tp.random_observation(17);
    const double y_energy = y.y.squaredNorm();

    SolverConfig cfg;
    cfg.mode = SolverMode::Exhaustive;
    cfg.residual_stop_ratio = 0.0;
    double prev = y_energy;
    for (int k = 1; k <= 4; ++k) {
        cfg.n_paths_max = k;
        const SparseEstimate est = momp_solve(y, tp.phi, tp.set, cfg);
        CHECK(est.residual_energy <= prev * (1.0 + 1e-12));
        prev = est.residual_energy;

        // Recompute the residual and check it is orthogonal to every atom in
        // the support, as a least-squares refit guarantees.
        VectorXcd r = y.y;
        for (std::size_t i = 0; i < est.support.size(); ++i)
            r -= est.coeffs[Eigen::Index(i)] * measured_atom(tp.phi, tp.set, est.support[i]);
        CHECK(std::abs(r.squaredNorm() - est.residual_energy) < 1e-9 * y_energy);
        for (const MultiIndex& j : est.support) {
            const VectorXcd q = measured_atom(tp.phi, tp.set, j);
            CHECK(std::abs(q.dot(r)) < 1e-8 * q.norm() * std::sqrt(y_energy));
        }
    }
    CHECK(prev < 0.9 * y_energy);
}

TEST_CASE("solver: atom guard rejects oversized flat scans") {
    const TinyProblem tp;
    const Observation y = tp.random_observation(19);

    SolverConfig cfg;
    cfg.atom_guard = 8; // total atom count is 48
    cfg.mode = SolverMode::Exhaustive;
    CHECK_THROWS_AS(momp_solve(y, tp.phi, tp.set, cfg), CapacityError);
    CHECK_THROWS_AS(omp_solve(y, tp.phi, tp.set, cfg), CapacityError);

    // The alternating solver never flattens, so the guard does not apply.
    cfg.mode = SolverMode::Alternating;
    CHECK_NOTHROW(momp_solve(y, tp.phi, tp.set, cfg));
}

TEST_CASE("solver: extract_paths maps grid values onto paths") {
    const TinyProblem tp;
    SparseEstimate est;
    est.support = {{1, 1, 1, 1, 2}};
    est.coeffs = VectorXcd::Constant(1, cplx{2.0, 1.0});

    const ExtractedPaths out = extract_paths(est, tp.set);
    REQUIRE(out.paths.size() == 1);
    const Path& p = out.paths[0];
    CHECK(p.gain == cplx{2.0, 1.0});
    CHECK(p.delay_s == doctest::Approx(tp.set.grids[4][2]));
    CHECK(p.aoa.x == doctest::Approx(0.0));
    CHECK(p.aoa.y == doctest::Approx(0.0));
    CHECK(p.aoa.z == doctest::Approx(1.0));
    CHECK_FALSE(out.clamped[0]);
}

TEST_CASE("solver: extract_paths clamps off-circle direction components") {
    const TinyProblem tp;
    SparseEstimate est;
    est.support = {{0, 0, 1, 1, 0}}; // aoa (x, y) = (-1, -1), off the unit circle
    est.coeffs = VectorXcd::Constant(1, cplx{1.0, 0.0});

    const ExtractedPaths out = extract_paths(est, tp.set);
    REQUIRE(out.paths.size() == 1);
    CHECK(out.clamped[0]);
    const Path& p = out.paths[0];
    CHECK(p.aoa.x * p.aoa.x + p.aoa.y * p.aoa.y + p.aoa.z * p.aoa.z == doctest::Approx(1.0));
    CHECK(p.aoa.z == doctest::Approx(0.0));
    CHECK(p.aoa.x == doctest::Approx(-1.0 / std::sqrt(2.0)));
}
