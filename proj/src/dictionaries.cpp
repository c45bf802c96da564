// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/dictionaries.hpp"

#include <cmath>

#include "momploc/channel.hpp"

namespace momploc {

namespace {

int atoms_for(double k_res, int n_s) {
    return int(std::lround(k_res * n_s));
}

// Uniform grid over [-1, 1) in the direction-component (sine space) domain.
VectorXd angular_grid(int n_a) {
    VectorXd g(n_a);
    for (int i = 0; i < n_a; ++i)
        g[i] = -1.0 + 2.0 * i / n_a;
    return g;
}

MatrixXcd steering_dictionary(int n_s, const VectorXd& grid, double spacing, bool conjugate) {
    MatrixXcd psi(n_s, grid.size());
    for (int c = 0; c < grid.size(); ++c) {
        VectorXcd col = steering_component(n_s, grid[c], spacing);
        psi.col(c) = conjugate ? col.conjugate() : col;
    }
    return psi;
}

} // namespace

DictionarySet build_dictionaries(const DictionaryConfig& cfg, const PulseShape& pulse) {
    cfg.validate();
    DictionarySet set;

    const int n_s[5] = {cfg.rx_geom.nx, cfg.rx_geom.ny, cfg.tx_geom.nx, cfg.tx_geom.ny,
                        cfg.d_taps};
    for (int k = 0; k < 4; ++k)
        set.grids[size_t(k)] = angular_grid(atoms_for(cfg.k_res, n_s[k]));

    set.psi[0] = steering_dictionary(n_s[0], set.grids[0], cfg.rx_geom.spacing_wavelengths, false);
    set.psi[1] = steering_dictionary(n_s[1], set.grids[1], cfg.rx_geom.spacing_wavelengths, false);
    set.psi[2] = steering_dictionary(n_s[2], set.grids[2], cfg.tx_geom.spacing_wavelengths, true);
    set.psi[3] = steering_dictionary(n_s[3], set.grids[3], cfg.tx_geom.spacing_wavelengths, true);

    // Delay dictionary: [a_D(tau)]_d = p((d-1)Ts - tau), half-open grid
    // [0, D*Ts) so the endpoint does not alias back into the window.
    const int n5 = atoms_for(cfg.k_res, cfg.d_taps);
    const double ts = cfg.sample_period_s;
    VectorXd tau(n5);
    for (int i = 0; i < n5; ++i)
        tau[i] = double(i) * cfg.d_taps * ts / n5;
    set.grids[4] = tau;
    MatrixXcd psi5(cfg.d_taps, n5);
    for (int c = 0; c < n5; ++c)
        for (int d = 0; d < cfg.d_taps; ++d)
            psi5(d, c) = pulse.eval(d * ts - tau[c]);
    set.psi[4] = psi5;

    return set;
}

Atom atom(const DictionarySet& set, const MultiIndex& j) {
    set.check_index(j);
    Atom a;
    a.aoa_x = set.grids[0][j[0]];
    a.aoa_y = set.grids[1][j[1]];
    a.aod_x = set.grids[2][j[2]];
    a.aod_y = set.grids[3][j[3]];
    a.delay_s = set.grids[4][j[4]];
    for (int k = 0; k < 5; ++k)
        a.factors[size_t(k)] = set.psi[size_t(k)].col(j[size_t(k)]);
    return a;
}

} // namespace momploc
