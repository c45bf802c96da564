// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/serialize.hpp"

namespace momploc {

nlohmann::json paths_to_json(const std::vector<Path>& paths) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Path& p : paths) {
        arr.push_back({{"gain_re", p.gain.real()},
                       {"gain_im", p.gain.imag()},
                       {"delay_s", p.delay_s},
                       {"aoa", {p.aoa.x, p.aoa.y, p.aoa.z}},
                       {"aod", {p.aod.x, p.aod.y, p.aod.z}}});
    }
    return arr;
}

std::vector<Path> paths_from_json(const nlohmann::json& j) {
    std::vector<Path> paths;
    for (const auto& e : j) {
        Path p;
        p.gain = cplx(e.at("gain_re").get<double>(), e.at("gain_im").get<double>());
        p.delay_s = e.at("delay_s").get<double>();
        const auto& aoa = e.at("aoa");
        const auto& aod = e.at("aod");
        p.aoa = {aoa.at(0).get<double>(), aoa.at(1).get<double>(), aoa.at(2).get<double>()};
        p.aod = {aod.at(0).get<double>(), aod.at(1).get<double>(), aod.at(2).get<double>()};
        paths.push_back(p);
    }
    return paths;
}

nlohmann::json estimate_to_json(const SparseEstimate& est) {
    nlohmann::json support = nlohmann::json::array();
    for (const MultiIndex& j : est.support)
        support.push_back({j[0], j[1], j[2], j[3], j[4]});
    nlohmann::json coeffs = nlohmann::json::array();
    for (Eigen::Index i = 0; i < est.coeffs.size(); ++i)
        coeffs.push_back({{"re", est.coeffs[i].real()}, {"im", est.coeffs[i].imag()}});
    return {{"support", support}, {"coeffs", coeffs}, {"residual_energy", est.residual_energy}};
}

SparseEstimate estimate_from_json(const nlohmann::json& j) {
    SparseEstimate est;
    for (const auto& s : j.at("support"))
        est.support.push_back(
            {s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>(), s.at(3).get<int>(),
             s.at(4).get<int>()});
    const auto& coeffs = j.at("coeffs");
    est.coeffs.resize(Eigen::Index(coeffs.size()));
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        est.coeffs[Eigen::Index(i)] =
            cplx(coeffs[i].at("re").get<double>(), coeffs[i].at("im").get<double>());
    est.residual_energy = j.at("residual_energy").get<double>();
    return est;
}

nlohmann::json fix_to_json(const PositionFix& fix) {
    nlohmann::json labels = nlohmann::json::array();
    for (PathLabel l : fix.labels)
        labels.push_back(to_string(l));
    return {{"u", {fix.u.x(), fix.u.y(), fix.u.z()}},
            {"clock_offset_m", fix.clock_offset_m},
            {"condition_number", fix.condition_number},
            {"labels", labels},
            {"weights", fix.weights}};
}

nlohmann::json grids_to_json(const DictionarySet& set) {
    nlohmann::json out;
    const char* names[5] = {"aoa_x", "aoa_y", "aod_x", "aod_y", "delay_s"};
    for (int k = 0; k < 5; ++k) {
        nlohmann::json g = nlohmann::json::array();
        for (Eigen::Index i = 0; i < set.grids[size_t(k)].size(); ++i)
            g.push_back(set.grids[size_t(k)][i]);
        out[names[k]] = g;
    }
    return out;
}

} // namespace momploc
