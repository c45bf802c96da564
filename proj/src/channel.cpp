// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/channel.hpp"

#include <cmath>
#include <numbers>

namespace momploc {

double PulseShape::eval(double t) const {
    const double x = t / sample_period_s;
    auto sinc = [](double v) {
        if (v == 0.0)
            return 1.0;
        const double p = std::numbers::pi * v;
        return std::sin(p) / p;
    };
    switch (kind) {
    case PulseKind::Sinc:
        return sinc(x);
    case PulseKind::RaisedCosine: {
        const double b = rolloff;
        const double den = 1.0 - 4.0 * b * b * x * x;
        if (std::abs(den) < 1e-12) {
            // t = Ts/(2*beta) singularity
            return (std::numbers::pi / 4.0) * sinc(1.0 / (2.0 * b));
        }
        return sinc(x) * std::cos(std::numbers::pi * b * x) / den;
    }
    }
    return 0.0;
}

VectorXcd steering_component(int n, double component, double spacing_wavelengths) {
    if (n < 1)
        throw ConfigError("steering_component: n must be >= 1");
    if (std::abs(component) > 1.0)
        throw InvalidDirectionError("steering_component: |component| > 1");
    VectorXcd v(n);
    const double phase_step = 2.0 * std::numbers::pi * spacing_wavelengths * component;
    for (int k = 0; k < n; ++k)
        v[k] = std::polar(1.0, phase_step * k);
    return v;
}

VectorXcd ura_response(const UraGeometry& geom, const UnitDirection& dir) {
    geom.validate();
    const VectorXcd ax = steering_component(geom.nx, dir.x, geom.spacing_wavelengths);
    const VectorXcd ay = steering_component(geom.ny, dir.y, geom.spacing_wavelengths);
    VectorXcd a(geom.nx * geom.ny);
    for (int kx = 0; kx < geom.nx; ++kx)
        a.segment(kx * geom.ny, geom.ny) = ax[kx] * ay;
    return a;
}

ChannelTensor build_channel(std::span<const Path> paths, const UraGeometry& geom_rx,
                            const UraGeometry& geom_tx, const PulseShape& pulse, int d_taps,
                            double clock_offset_s) {
    if (d_taps < 1)
        throw ConfigError("build_channel: d_taps must be >= 1");
    geom_rx.validate();
    geom_tx.validate();
    const double ts = pulse.sample_period_s;
    const double window = d_taps * ts;

    ChannelTensor h;
    h.sample_period_s = ts;
    h.taps.assign(size_t(d_taps), MatrixXcd::Zero(geom_rx.size(), geom_tx.size()));

    for (const Path& p : paths) {
        if (p.delay_s < 0.0)
            throw ConfigError("build_channel: negative path delay");
        const VectorXcd ar = ura_response(geom_rx, p.aoa);
        const VectorXcd at = ura_response(geom_tx, p.aod);
        const MatrixXcd outer = p.gain * (ar * at.adjoint());
        for (int d = 0; d < d_taps; ++d) {
            const double t = d * ts + clock_offset_s - p.delay_s;
            if (std::abs(t) > window)
                continue;
            const double w = pulse.eval(t);
            if (w != 0.0)
                h.taps[size_t(d)] += w * outer;
        }
    }
    return h;
}

} // namespace momploc
