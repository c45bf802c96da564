// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_LOCALIZATION_HPP
#define MOMPLOC_LOCALIZATION_HPP

#include <vector>

#include "momploc/types.hpp"

namespace momploc {

struct ClassifierConfig {
    double r_az = 0.12;
    double r_el = 0.12;
    // Swaps the two elevation conditions to match the equation labels as
    // printed rather than the physically consistent prose reading.
    bool printed_equation_mapping = false;

    void validate() const {
        if (!(r_az > 0.0 && r_az <= 2.0) || !(r_el > 0.0 && r_el <= 1.0))
            throw ConfigError("ClassifierConfig: thresholds out of range");
    }
};

enum class PathLabel { LoS, Wall, FloorCeiling, Spurious };

const char* to_string(PathLabel label);

struct PositionFix {
    Vector3d u = Vector3d::Zero();  // device position, receiver at the origin
    double clock_offset_m = 0.0;    // c * tau_0
    double condition_number = 0.0;  // of the 4x4 normal matrix
    std::vector<PathLabel> labels;
    std::vector<double> weights;
};

// Azimuth arg(x + jy) in (-pi, pi] (0 at the pole) and elevation asin(z).
std::pair<double, double> to_spherical(const UnitDirection& dir);

PathLabel classify(const Path& path, const ClassifierConfig& cfg);

// w_l = |gain_l|^2
std::vector<double> weights_from_gains(const std::vector<Path>& paths);

// Weighted closed-form solve of the per-path constraints
//   chi_l (u - aoa_l * (c*dtau_l + c*tau0)) = 0
// with chi selecting x/y/z (LoS), x/y (floor-ceiling) or z (wall).
// Paths carry relative delays; Spurious paths contribute nothing.
// Throws UnlocalizableError when the normal matrix is rank deficient.
PositionFix solve_position(const std::vector<Path>& paths, const std::vector<PathLabel>& labels,
                           const std::vector<double>& weights);

} // namespace momploc

#endif
