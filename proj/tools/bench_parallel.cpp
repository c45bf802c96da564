// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

// Compares the OpenMP atom-scoring kernel against the serial reference on a
// mid-size instance and checks they agree bitwise.

#include <chrono>
#include <iostream>

#include "momploc/channel.hpp"
#include "momploc/dictionaries.hpp"
#include "momploc/solver.hpp"
#include "momploc/training.hpp"

using namespace momploc;

int main() {
    TrainingConfig train;
    train.m_frames = 8;
    train.m_tx_chains = 2;
    train.m_rx_chains = 4;
    train.q_symbols = 32;
    train.d_taps = 8;
    train.tx_power_w = 1.0;
    train.noise_power_w = 1e-4;
    train.rng_seed = 7;

    const UraGeometry rx{4, 4};
    const UraGeometry tx{2, 2};
    PulseShape pulse;
    pulse.sample_period_s = 1e-9;

    const auto frames = make_training_frames(train, tx, rx);
    const SensingTensor phi = build_sensing(frames, train, tx, rx);
    const DictionarySet set =
        build_dictionaries({2.0, train.d_taps, pulse.sample_period_s, rx, tx}, pulse);

    Path p;
    p.aoa = UnitDirection::from_xy(0.21, -0.36);
    p.aod = UnitDirection::from_xy(-0.13, 0.44);
    p.delay_s = 2.7e-9;
    p.gain = cplx(0.9, -0.4);
    const ChannelTensor h = build_channel({&p, 1}, rx, tx, pulse, train.d_taps, 0.0);

    Rng rng(11);
    std::vector<MatrixXcd> received(frames.size());
    for (std::size_t m = 0; m < frames.size(); ++m) {
        Rng fr = rng.substream(m);
        received[m] = whiten(frames[m], simulate_rx(h, frames[m], train, fr));
    }
    const Observation obs = assemble_observation(frames, received);

    using clock = std::chrono::steady_clock;
    auto time_it = [&](bool parallel) {
        const auto t0 = clock::now();
        VectorXd scores = score_all_atoms(phi, set, obs.y, parallel);
        const double dt = std::chrono::duration<double>(clock::now() - t0).count();
        return std::pair<VectorXd, double>(std::move(scores), dt);
    };

    // Warm up once, then time three passes each.
    time_it(false);
    double serial = 0.0, parallel = 0.0;
    VectorXd s_ref, s_par;
    for (int i = 0; i < 3; ++i) {
        auto [s0, t0] = time_it(false);
        auto [s1, t1] = time_it(true);
        serial += t0;
        parallel += t1;
        s_ref = std::move(s0);
        s_par = std::move(s1);
    }

    const bool identical = (s_ref.size() == s_par.size()) &&
                           std::equal(s_ref.data(), s_ref.data() + s_ref.size(), s_par.data());
    std::cout << "atoms scored:   " << s_ref.size() << '\n';
    std::cout << "serial:         " << serial / 3.0 << " s\n";
    std::cout << "openmp:         " << parallel / 3.0 << " s\n";
    std::cout << "speedup:        " << serial / parallel << "x\n";
    std::cout << "bitwise match:  " << (identical ? "yes" : "NO") << '\n';
    return identical ? 0 : 1;
}
