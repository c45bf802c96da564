// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/localization.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace momploc {

const char* to_string(PathLabel label) {
    switch (label) {
    case PathLabel::LoS:
        return "LoS";
    case PathLabel::Wall:
        return "Wall";
    case PathLabel::FloorCeiling:
        return "FloorCeiling";
    case PathLabel::Spurious:
        return "Spurious";
    }
    return "?";
}

std::pair<double, double> to_spherical(const UnitDirection& dir) {
    const double az = (dir.x == 0.0 && dir.y == 0.0) ? 0.0 : std::atan2(dir.y, dir.x);
    const double el = std::asin(std::clamp(dir.z, -1.0, 1.0));
    return {az, el};
}

PathLabel classify(const Path& path, const ClassifierConfig& cfg) {
    cfg.validate();
    const auto [theta_az, theta_el] = to_spherical(path.aoa);
    const auto [phi_az, phi_el] = to_spherical(path.aod);

    bool sum_el = std::abs(std::sin(theta_el + phi_el)) < cfg.r_el;
    bool diff_el = std::abs(std::sin(theta_el - phi_el)) < cfg.r_el;
    if (cfg.printed_equation_mapping)
        std::swap(sum_el, diff_el);
    const bool az_opposite = std::cos(theta_az - phi_az) < cfg.r_az - 1.0;

    // LoS is the most constrained hypothesis and wins when several condition
    // sets hold at once.
    if (sum_el && az_opposite)
        return PathLabel::LoS;
    if (diff_el && az_opposite)
        return PathLabel::FloorCeiling;
    if (sum_el)
        return PathLabel::Wall;
    return PathLabel::Spurious;
}

std::vector<double> weights_from_gains(const std::vector<Path>& paths) {
    std::vector<double> w;
    w.reserve(paths.size());
    for (const Path& p : paths)
        w.push_back(std::norm(p.gain));
    return w;
}

PositionFix solve_position(const std::vector<Path>& paths, const std::vector<PathLabel>& labels,
                           const std::vector<double>& weights) {
    if (paths.size() != labels.size() || paths.size() != weights.size())
        throw ShapeError("solve_position: paths/labels/weights length mismatch");

    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    Eigen::Vector4d b = Eigen::Vector4d::Zero();
    int used = 0;
    for (std::size_t l = 0; l < paths.size(); ++l) {
        if (labels[l] == PathLabel::Spurious)
            continue;
        const Vector3d theta = paths[l].aoa.vec();
        const double range = paths[l].delay_s * kSpeedOfLight; // c * dtau
        Vector3d sel = Vector3d::Zero();
        switch (labels[l]) {
        case PathLabel::LoS:
            sel = Vector3d::Ones();
            break;
        case PathLabel::FloorCeiling:
            sel = Vector3d(1.0, 1.0, 0.0);
            break;
        case PathLabel::Wall:
            sel = Vector3d(0.0, 0.0, 1.0);
            break;
        default:
            break;
        }
        Eigen::Matrix<double, 3, 4> u_theta;
        u_theta << Eigen::Matrix3d::Identity(), -theta;
        const Eigen::Matrix<double, 3, 4> su = sel.asDiagonal() * u_theta;
        a += weights[l] * (su.transpose() * su);
        b += weights[l] * range * (su.transpose() * (sel.asDiagonal() * theta));
        ++used;
    }
    if (used == 0)
        throw UnlocalizableError("solve_position: no non-spurious paths");

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(a);
    const Eigen::Vector4d ev = eig.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    if (lo < -1e-9 * std::max(hi, 1.0))
        throw std::logic_error("solve_position: normal matrix not PSD");
    if (!(hi > 0.0) || lo / hi < 1e-10) {
        std::ostringstream msg;
        msg << "solve_position: unlocalizable, unconstrained direction [";
        const Eigen::Vector4d null_dir = eig.eigenvectors().col(0);
        msg << null_dir.transpose() << "] (x,y,z,offset)";
        throw UnlocalizableError(msg.str());
    }

    const Eigen::Vector4d z = eig.eigenvectors() *
                              (eig.eigenvalues().cwiseInverse().asDiagonal() *
                               (eig.eigenvectors().transpose() * b));
    PositionFix fix;
    fix.u = z.head<3>();
    fix.clock_offset_m = z[3];
    fix.condition_number = hi / lo;
    fix.labels = labels;
    fix.weights = weights;
    return fix;
}

} // namespace momploc
