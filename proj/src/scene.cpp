// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace momploc {

namespace {

constexpr double kEps = 1e-9;

// Does the open segment a->b cross the wall outside its aperture?
bool blocked_by(const InteriorWall& w, const Vector3d& a, const Vector3d& b) {
    const double da = a[w.axis] - w.value;
    const double db = b[w.axis] - w.value;
    if (da * db >= -kEps * kEps) // same side or touching
        return false;
    const double t = da / (da - db);
    if (t <= kEps || t >= 1.0 - kEps)
        return false;
    const Vector3d p = a + t * (b - a);
    for (int ax = 0; ax < 3; ++ax) {
        if (ax == w.axis)
            continue;
        if (p[ax] < w.lo[ax] - kEps || p[ax] > w.hi[ax] + kEps)
            return false; // misses the wall panel entirely
    }
    if (w.aperture && w.aperture->contains(p))
        return false;
    return true;
}

bool segment_clear(const RoomScene& scene, const Vector3d& a, const Vector3d& b) {
    for (const InteriorWall& w : scene.walls)
        if (blocked_by(w, a, b))
            return false;
    return true;
}

double amplitude(const RoomScene& scene, double length_m, int bounces) {
    const double fs = scene.carrier_wavelength_m / (4.0 * std::numbers::pi * length_m);
    return fs * std::pow(10.0, -scene.reflection_loss_db * bounces / 20.0);
}

} // namespace

AccessPoint AccessPoint::wall_mounted(const Vector3d& position, const Vector3d& boresight) {
    const Vector3d n = boresight.normalized();
    Vector3d x_axis = Vector3d::UnitZ().cross(n);
    if (x_axis.norm() < 1e-12)
        throw ConfigError("AccessPoint::wall_mounted: boresight must be horizontal");
    x_axis.normalize();
    const Vector3d y_axis = n.cross(x_axis);
    AccessPoint ap;
    ap.position = position;
    ap.orientation.row(0) = x_axis;
    ap.orientation.row(1) = y_axis;
    ap.orientation.row(2) = n;
    return ap;
}

void RoomScene::validate() const {
    if (boxes.empty())
        throw ConfigError("RoomScene: no rooms");
    if (aps.empty())
        throw ConfigError("RoomScene: no access points");
    for (const AccessPoint& ap : aps)
        if (room_of(ap.position) < 0)
            throw ConfigError("RoomScene: access point outside every room");
    for (const Vector3d& u : users)
        if (room_of(u) < 0)
            throw ConfigError("RoomScene: user outside every room");
}

int RoomScene::room_of(const Vector3d& p) const {
    for (std::size_t i = 0; i < boxes.size(); ++i)
        if (boxes[i].contains(p))
            return int(i);
    return -1;
}

std::vector<Path> trace_paths(const RoomScene& scene, int ap, int user, std::uint64_t seed) {
    if (ap < 0 || ap >= int(scene.aps.size()) || user < 0 || user >= int(scene.users.size()))
        throw IndexError("trace_paths: ap or user index out of range");
    const Vector3d a = scene.aps[size_t(ap)].position;
    const Vector3d u = scene.users[size_t(user)];
    const int room = scene.room_of(a);
    if (room < 0 || scene.room_of(u) < 0)
        throw ConfigError("trace_paths: endpoint outside every room");
    const Box& bx = scene.boxes[size_t(room)];

    Rng rng = Rng(seed).substream(mix_seed(std::uint64_t(ap), std::uint64_t(user)));
    std::vector<Path> paths;

    // Line of sight.
    if (segment_clear(scene, a, u)) {
        const double len = (u - a).norm();
        Path p;
        p.delay_s = len / kSpeedOfLight;
        p.aoa = UnitDirection::from_vec(u - a);
        p.aod = UnitDirection::from_vec(a - u);
        p.gain = std::polar(amplitude(scene, len, 0), rng.uniform(0.0, 2.0 * std::numbers::pi));
        paths.push_back(p);
    } else {
        rng.uniform(0.0, 1.0); // keep the draw schedule stable
    }

    // One bounce off each face of the AP's room.
    for (int axis = 0; axis < 3; ++axis) {
        for (double value : {bx.lo[axis], bx.hi[axis]}) {
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            if ((a[axis] - value) * (u[axis] - value) <= 0.0)
                continue; // endpoints must face the same side of the plane
            Vector3d u_img = u;
            u_img[axis] = 2.0 * value - u[axis];
            const double denom = u_img[axis] - a[axis];
            if (std::abs(denom) < kEps)
                continue;
            const double t = (value - a[axis]) / denom;
            if (t <= kEps || t >= 1.0 - kEps)
                continue;
            const Vector3d refl = a + t * (u_img - a);
            bool on_face = true;
            for (int ax = 0; ax < 3; ++ax)
                if (ax != axis && (refl[ax] < bx.lo[ax] - kEps || refl[ax] > bx.hi[ax] + kEps))
                    on_face = false;
            if (!on_face)
                continue;
            if (!segment_clear(scene, a, refl) || !segment_clear(scene, refl, u))
                continue;
            const double len = (u_img - a).norm();
            Path p;
            p.delay_s = len / kSpeedOfLight;
            p.aoa = UnitDirection::from_vec(u_img - a);
            p.aod = UnitDirection::from_vec(refl - u);
            p.gain = std::polar(amplitude(scene, len, 1), phase);
            paths.push_back(p);
        }
    }

    // Optional random clutter standing in for higher-order reflections.
    if (scene.clutter_paths > 0 && !paths.empty()) {
        double strongest = 0.0;
        double max_delay = 0.0;
        for (const Path& p : paths) {
            strongest = std::max(strongest, std::abs(p.gain));
            max_delay = std::max(max_delay, p.delay_s);
        }
        const double amp = strongest * std::pow(10.0, scene.clutter_rel_power_db / 20.0);
        for (int i = 0; i < scene.clutter_paths; ++i) {
            auto random_dir = [&rng]() {
                const double z = rng.uniform(-1.0, 1.0);
                const double az = rng.uniform(0.0, 2.0 * std::numbers::pi);
                const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                return UnitDirection{r * std::cos(az), r * std::sin(az), z};
            };
            Path p;
            p.aoa = random_dir();
            p.aod = random_dir();
            p.delay_s = rng.uniform(paths[0].delay_s, max_delay * 1.5 + 1e-9);
            p.gain = std::polar(amp, rng.uniform(0.0, 2.0 * std::numbers::pi));
            paths.push_back(p);
        }
    }

    std::sort(paths.begin(), paths.end(),
              [](const Path& l, const Path& r) { return l.delay_s < r.delay_s; });
    return paths;
}

int associate_ap(const RoomScene& scene, int user, std::uint64_t seed) {
    if (scene.aps.empty())
        throw ConfigError("associate_ap: no access points");
    int best = 0;
    double best_power = -1.0;
    for (int ap = 0; ap < int(scene.aps.size()); ++ap) {
        double power = 0.0;
        for (const Path& p : trace_paths(scene, ap, user, seed))
            power += std::norm(p.gain);
        if (power > best_power) {
            best_power = power;
            best = ap;
        }
    }
    return best;
}

double sample_clock_offset(Rng& rng, double range_s) {
    if (!(range_s > 0.0))
        throw ConfigError("sample_clock_offset: range must be > 0");
    return rng.uniform(0.0, range_s);
}

GroundTruth make_ground_truth(const RoomScene& scene, int user, std::uint64_t seed,
                              double clock_offset_range_s) {
    GroundTruth gt;
    gt.ap = associate_ap(scene, user, seed);
    gt.paths = trace_paths(scene, gt.ap, user, seed);
    Rng rng = Rng(seed).substream(mix_seed(0xC10CULL, std::uint64_t(user)));
    gt.clock_offset_s = sample_clock_offset(rng, clock_offset_range_s);
    gt.position = scene.users[size_t(user)];
    return gt;
}

RoomScene default_scene() {
    RoomScene s;
    s.boxes.push_back({Vector3d(0.0, 0.0, 0.0), Vector3d(6.0, 5.0, 3.0)});
    s.boxes.push_back({Vector3d(6.0, 0.0, 0.0), Vector3d(10.0, 5.0, 3.0)});

    InteriorWall wall;
    wall.axis = 0;
    wall.value = 6.0;
    wall.lo = Vector3d(6.0, 0.0, 0.0);
    wall.hi = Vector3d(6.0, 5.0, 3.0);
    Box door;
    door.lo = Vector3d(6.0 - 1e-6, 2.1, 0.0);
    door.hi = Vector3d(6.0 + 1e-6, 3.0, 2.1);
    wall.aperture = door;
    s.walls.push_back(wall);

    s.aps.push_back(AccessPoint::wall_mounted(Vector3d(0.05, 2.5, 2.0), Vector3d::UnitX()));
    s.aps.push_back(AccessPoint::wall_mounted(Vector3d(9.95, 2.5, 2.0), -Vector3d::UnitX()));

    // 218 user positions along a walk through both rooms at 1 m height.
    const std::vector<Vector3d> waypoints = {
        {1.0, 1.0, 1.0}, {5.0, 1.5, 1.0}, {5.0, 2.5, 1.0},
        {6.5, 2.5, 1.0}, {9.0, 2.0, 1.0}, {9.0, 4.0, 1.0},
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
        total += (waypoints[i + 1] - waypoints[i]).norm();
    const int n_users = 218;
    for (int k = 0; k < n_users; ++k) {
        double target = total * k / (n_users - 1);
        Vector3d pos = waypoints.back();
        for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
            const double seg = (waypoints[i + 1] - waypoints[i]).norm();
            if (target <= seg) {
                pos = waypoints[i] + (target / seg) * (waypoints[i + 1] - waypoints[i]);
                break;
            }
            target -= seg;
        }
        s.users.push_back(pos);
    }
    return s;
}

} // namespace momploc
