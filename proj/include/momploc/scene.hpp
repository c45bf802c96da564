// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_SCENE_HPP
#define MOMPLOC_SCENE_HPP

#include <optional>
#include <vector>

#include "momploc/rng.hpp"
#include "momploc/types.hpp"

namespace momploc {

struct Box {
    Vector3d lo = Vector3d::Zero();
    Vector3d hi = Vector3d::Zero();
    bool contains(const Vector3d& p, double eps = 1e-9) const {
        return (p.array() >= lo.array() - eps).all() && (p.array() <= hi.array() + eps).all();
    }
};

// Axis-aligned rectangle on the plane axis = value, with an optional
// rectangular aperture (doorway) cut out of it.
struct InteriorWall {
    int axis = 0;       // 0=x, 1=y, 2=z
    double value = 0.0;
    Vector3d lo = Vector3d::Zero(); // rectangle extents in the other two axes
    Vector3d hi = Vector3d::Zero();
    std::optional<Box> aperture;
};

struct AccessPoint {
    Vector3d position = Vector3d::Zero();
    Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity(); // local = R * global

    // Wall-mounted vertical array whose boresight (local z) is the given
    // horizontal direction.
    static AccessPoint wall_mounted(const Vector3d& position, const Vector3d& boresight);
};

struct RoomScene {
    std::vector<Box> boxes;
    std::vector<InteriorWall> walls;
    std::vector<AccessPoint> aps;
    std::vector<Vector3d> users;
    double carrier_wavelength_m = 0.005; // 60 GHz
    double reflection_loss_db = 6.0;
    int clutter_paths = 0;               // random spurious paths per link
    double clutter_rel_power_db = -20.0;

    void validate() const;
    int room_of(const Vector3d& p) const; // -1 when outside every box
};

struct GroundTruth {
    int ap = -1;
    std::vector<Path> paths;   // absolute delays, global-frame directions
    double clock_offset_s = 0.0;
    Vector3d position = Vector3d::Zero();
};

// First-order image-source tracing: LoS plus one bounce off each face of the
// room containing the AP, occlusion-tested against the interior walls.
// Directions are global-frame; AoA points from the AP towards the (image)
// source. Reflection phases and clutter parameters are drawn from the seed.
std::vector<Path> trace_paths(const RoomScene& scene, int ap, int user, std::uint64_t seed);

// Access point with the highest total received path power; ties break to the
// lowest index.
int associate_ap(const RoomScene& scene, int user, std::uint64_t seed);

// Uniform clock offset in [0, range_s).
double sample_clock_offset(Rng& rng, double range_s);

GroundTruth make_ground_truth(const RoomScene& scene, int user, std::uint64_t seed,
                              double clock_offset_range_s);

// Two-room home office: 6x5x3 m and 4x5x3 m joined by a doorway, one
// wall-mounted AP per room, 218 users on a piecewise-linear walk through
// both rooms at 1 m height.
RoomScene default_scene();

} // namespace momploc

#endif
