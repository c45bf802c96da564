// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_CHANNEL_HPP
#define MOMPLOC_CHANNEL_HPP

#include <span>

#include "momploc/types.hpp"

namespace momploc {

// One axis of a URA steering vector: entry k (0-based) is
// exp(j*2*pi*spacing*k*component).
VectorXcd steering_component(int n, double component, double spacing_wavelengths);

// Full URA response a(dir) = a_x(dir.x) (x) a_y(dir.y); the flat element
// index is kx*ny + ky, x index slowest.
VectorXcd ura_response(const UraGeometry& geom, const UnitDirection& dir);

// Synthesizes the D-tap geometric channel
//   H_d = sum_l gain_l a_R(aoa_l) a_T(aod_l)^H p((d-1)Ts + tau0 - tau_l).
// Pulse evaluation is truncated to |t| <= D*Ts; delays inside the modeled
// window never hit the truncation.
ChannelTensor build_channel(std::span<const Path> paths, const UraGeometry& geom_rx,
                            const UraGeometry& geom_tx, const PulseShape& pulse, int d_taps,
                            double clock_offset_s);

} // namespace momploc

#endif
