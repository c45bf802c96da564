// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_TYPES_HPP
#define MOMPLOC_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace momploc {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidDirectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateCombinerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnlocalizableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 3D unit vector holding an angular direction. Components are direction
// cosines; for antenna-facing directions the z component is non-negative.
struct UnitDirection {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    Vector3d vec() const { return {x, y, z}; }

    double norm_error() const { return std::abs(x * x + y * y + z * z - 1.0); }

    static UnitDirection from_vec(const Vector3d& v) {
        const double n = v.norm();
        if (n <= 0.0)
            throw InvalidDirectionError("zero direction vector");
        return {v.x() / n, v.y() / n, v.z() / n};
    }

    // Completes (x, y) with a non-negative z so the result is unit norm.
    // Inputs with x^2 + y^2 > 1 are clamped onto the unit circle; the
    // clamped flag is set when that happens.
    static UnitDirection from_xy(double x, double y, bool* clamped = nullptr) {
        double s = x * x + y * y;
        bool c = s > 1.0;
        if (c) {
            const double r = std::sqrt(s);
            x /= r;
            y /= r;
            s = 1.0;
        }
        if (clamped)
            *clamped = c;
        return {x, y, std::sqrt(std::max(0.0, 1.0 - s))};
    }
};

// One propagation path of the geometric channel.
struct Path {
    cplx gain{0.0, 0.0};   // complex linear amplitude
    double delay_s = 0.0;  // absolute (ground truth) or relative (estimate)
    UnitDirection aoa{};   // arrival direction at the receiver
    UnitDirection aod{};   // departure direction at the transmitter
};

// Uniform rectangular array, element pitch given in carrier wavelengths.
struct UraGeometry {
    int nx = 1;
    int ny = 1;
    double spacing_wavelengths = 0.5;

    int size() const { return nx * ny; }

    void validate() const {
        if (nx < 1 || ny < 1)
            throw ConfigError("UraGeometry: nx and ny must be >= 1");
    }
};

enum class PulseKind { Sinc, RaisedCosine };

// Band-limited pulse shaping function p(t).
struct PulseShape {
    PulseKind kind = PulseKind::Sinc;
    double sample_period_s = 1.0;
    double rolloff = 0.25; // raised-cosine only

    double eval(double t) const;
};

// Frequency-selective channel, D delay taps of size N_R x N_T each.
struct ChannelTensor {
    std::vector<MatrixXcd> taps; // taps[d] is N_R x N_T, d = 0..D-1
    double sample_period_s = 1.0;

    int n_rx() const { return taps.empty() ? 0 : int(taps[0].rows()); }
    int n_tx() const { return taps.empty() ? 0 : int(taps[0].cols()); }
    int d_taps() const { return int(taps.size()); }
};

} // namespace momploc

#endif
