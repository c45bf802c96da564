// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_DICTIONARIES_HPP
#define MOMPLOC_DICTIONARIES_HPP

#include <array>

#include "momploc/types.hpp"

namespace momploc {

// Dimension order used everywhere for 5-multi-indices:
//   0: rx-x component, 1: rx-y, 2: tx-x, 3: tx-y, 4: delay.
using MultiIndex = std::array<int, 5>;

struct DictionaryConfig {
    double k_res = 1.0;          // atoms per atom length, same for every dimension
    int d_taps = 1;
    double sample_period_s = 1.0;
    UraGeometry rx_geom;
    UraGeometry tx_geom;

    void validate() const {
        if (k_res < 1.0)
            throw ConfigError("DictionaryConfig: k_res must be >= 1");
        if (d_taps < 1)
            throw ConfigError("DictionaryConfig: d_taps must be >= 1");
        rx_geom.validate();
        tx_geom.validate();
    }
};

// The five per-dimension dictionaries and the real grids backing them.
// psi[0..1] are receive steering components, psi[2..3] are conjugated
// transmit steering components, psi[4] holds sampled pulse vectors.
struct DictionarySet {
    std::array<MatrixXcd, 5> psi;
    std::array<VectorXd, 5> grids;

    int atom_size(int k) const { return int(psi[size_t(k)].rows()); }
    int atom_count(int k) const { return int(psi[size_t(k)].cols()); }
    std::size_t total_atoms() const {
        std::size_t n = 1;
        for (const auto& m : psi)
            n *= std::size_t(m.cols());
        return n;
    }
    void check_index(const MultiIndex& j) const {
        for (int k = 0; k < 5; ++k)
            if (j[size_t(k)] < 0 || j[size_t(k)] >= atom_count(k))
                throw IndexError("dictionary multi-index out of range");
    }
};

// Grid values and per-dimension atom columns behind one multi-index.
struct Atom {
    double aoa_x, aoa_y;
    double aod_x, aod_y;
    double delay_s;
    std::array<VectorXcd, 5> factors;
};

// Angular grids uniformly cover [-1, 1); the delay grid covers [0, D*Ts).
DictionarySet build_dictionaries(const DictionaryConfig& cfg, const PulseShape& pulse);

Atom atom(const DictionarySet& set, const MultiIndex& j);

} // namespace momploc

#endif
