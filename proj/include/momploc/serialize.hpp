// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_SERIALIZE_HPP
#define MOMPLOC_SERIALIZE_HPP

#include <json.hpp>

#include "momploc/localization.hpp"
#include "momploc/solver.hpp"
#include "momploc/types.hpp"

namespace momploc {

// Path list <-> JSON array of
// {gain_re, gain_im, delay_s, aoa:[x,y,z], aod:[x,y,z]}.
nlohmann::json paths_to_json(const std::vector<Path>& paths);
std::vector<Path> paths_from_json(const nlohmann::json& j);

// {support: [[j1..j5]...], coeffs: [{re,im}...], residual_energy}
nlohmann::json estimate_to_json(const SparseEstimate& est);
SparseEstimate estimate_from_json(const nlohmann::json& j);

// {u:[x,y,z], clock_offset_m, condition_number, labels:[...], weights:[...]}
nlohmann::json fix_to_json(const PositionFix& fix);

// Dictionary grids, for debugging.
nlohmann::json grids_to_json(const DictionarySet& set);

} // namespace momploc

#endif
