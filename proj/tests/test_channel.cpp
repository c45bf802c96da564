// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "momploc/channel.hpp"
#include "momploc/rng.hpp"

using namespace momploc;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("steering_component broadside is all ones") {
    const VectorXcd v = steering_component(2, 0.0, 0.5);
    CHECK(v[0] == cplx(1.0, 0.0));
    CHECK(v[1] == cplx(1.0, 0.0));
}

TEST_CASE("steering_component endfire alternates sign") {
    const VectorXcd v = steering_component(2, 1.0, 0.5);
    CHECK(std::abs(v[0] - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(v[1] - cplx(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("steering_component quarter-turn phase progression") {
    const VectorXcd v = steering_component(4, 0.5, 0.5);
    const cplx expect[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(v[k] - expect[k]) < 1e-14);
}

TEST_CASE("steering_component unit magnitude and first entry one") {
    const VectorXcd v = steering_component(7, -0.73, 0.5);
    CHECK(std::abs(v[0] - cplx(1.0, 0.0)) < 1e-15);
    for (int k = 0; k < 7; ++k)
        CHECK(std::abs(std::abs(v[k]) - 1.0) < 1e-14);
}

TEST_CASE("steering_component rejects out-of-range components") {
    CHECK_THROWS_AS(steering_component(4, 1.01, 0.5), InvalidDirectionError);
    CHECK_THROWS_AS(steering_component(0, 0.0, 0.5), ConfigError);
}

TEST_CASE("ura_response boresight and endfire") {
    const UraGeometry g{2, 2};
    const VectorXcd bore = ura_response(g, UnitDirection{0, 0, 1});
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(bore[k] - cplx(1, 0)) < 1e-14);

    const VectorXcd end = ura_response(g, UnitDirection{1, 0, 0});
    const double expect[4] = {1, 1, -1, -1};
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(end[k] - cplx(expect[k], 0)) < 1e-13);
}

TEST_CASE("ura_response equals kronecker of component vectors") {
    const UraGeometry g{3, 4};
    Rng rng(17);
    for (int t = 0; t < 10; ++t) {
        const double x = rng.uniform(-0.7, 0.7);
        const double y = rng.uniform(-0.7, 0.7);
        const UnitDirection dir = UnitDirection::from_xy(x, y);
        const VectorXcd a = ura_response(g, dir);
        const VectorXcd ax = steering_component(g.nx, dir.x, g.spacing_wavelengths);
        const VectorXcd ay = steering_component(g.ny, dir.y, g.spacing_wavelengths);
        for (int kx = 0; kx < g.nx; ++kx)
            for (int ky = 0; ky < g.ny; ++ky)
                CHECK(a[kx * g.ny + ky] == ax[kx] * ay[ky]);
    }
}

TEST_CASE("ura_response conjugation symmetry") {
    const UraGeometry g{4, 3};
    const UnitDirection d = UnitDirection::from_xy(0.31, -0.44);
    const UnitDirection m = UnitDirection::from_xy(-0.31, 0.44);
    const VectorXcd a = ura_response(g, d);
    const VectorXcd b = ura_response(g, m);
    CHECK((b - a.conjugate()).norm() < 1e-12);
}

TEST_CASE("sinc pulse hits unity at zero and nulls at integer samples") {
    PulseShape p;
    p.kind = PulseKind::Sinc;
    p.sample_period_s = 2e-9;
    CHECK(p.eval(0.0) == 1.0);
    for (int k = 1; k <= 5; ++k) {
        CHECK(std::abs(p.eval(k * p.sample_period_s)) < 1e-12);
        CHECK(std::abs(p.eval(-k * p.sample_period_s)) < 1e-12);
    }
}

TEST_CASE("raised cosine is finite at its singularity and matches sinc at zero") {
    PulseShape p;
    p.kind = PulseKind::RaisedCosine;
    p.sample_period_s = 1.0;
    p.rolloff = 0.25;
    CHECK(p.eval(0.0) == 1.0);
    const double t_sing = 1.0 / (2.0 * p.rolloff);
    CHECK(std::isfinite(p.eval(t_sing)));
    // The special-cased point continues the function smoothly.
    CHECK(p.eval(t_sing) == doctest::Approx(p.eval(t_sing + 1e-8)).epsilon(1e-4));
    CHECK(std::abs(p.eval(1.0)) < 1e-12); // integer-sample null survives the rolloff
}

TEST_CASE("unit direction completion and clamping") {
    const UnitDirection d = UnitDirection::from_xy(0.3, 0.4);
    CHECK(d.z == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    CHECK(d.norm_error() < 1e-12);

    bool clamped = false;
    const UnitDirection c = UnitDirection::from_xy(3.0, 4.0, &clamped);
    CHECK(clamped);
    CHECK(c.x == doctest::Approx(0.6));
    CHECK(c.y == doctest::Approx(0.8));
    CHECK(c.z == doctest::Approx(0.0));

    CHECK_THROWS_AS(UnitDirection::from_vec(Vector3d::Zero()), InvalidDirectionError);
}

TEST_CASE("single on-grid path produces exactly one nonzero tap") {
    const UraGeometry rx{2, 2}, tx{2, 2};
    PulseShape pulse;
    pulse.sample_period_s = 1e-9;
    Path p;
    p.gain = cplx(0.8, -0.3);
    p.aoa = UnitDirection::from_xy(0.25, -0.5);
    p.aod = UnitDirection::from_xy(-0.125, 0.375);
    const int d0 = 3;
    p.delay_s = d0 * pulse.sample_period_s;

    const ChannelTensor h = build_channel({&p, 1}, rx, tx, pulse, 6, 0.0);
    const MatrixXcd expect =
        p.gain * (ura_response(rx, p.aoa) * ura_response(tx, p.aod).adjoint());
    for (int d = 0; d < 6; ++d) {
        if (d == d0)
            CHECK((h.taps[size_t(d)] - expect).norm() < 1e-12);
        else
            CHECK(h.taps[size_t(d)].norm() < 1e-12);
    }
}

TEST_CASE("build_channel matches direct evaluation for an off-grid delay") {
    const UraGeometry rx{2, 3}, tx{3, 2};
    PulseShape pulse;
    pulse.sample_period_s = 1e-9;
    Path p;
    p.gain = cplx(1.0, 0.5);
    p.aoa = UnitDirection::from_xy(-0.2, 0.6);
    p.aod = UnitDirection::from_xy(0.45, 0.1);
    p.delay_s = 2.5 * pulse.sample_period_s;
    const double tau0 = 0.25 * pulse.sample_period_s;

    const ChannelTensor h = build_channel({&p, 1}, rx, tx, pulse, 8, tau0);
    const MatrixXcd outer = ura_response(rx, p.aoa) * ura_response(tx, p.aod).adjoint();
    for (int d = 0; d < 8; ++d) {
        const MatrixXcd expect =
            p.gain * pulse.eval(d * pulse.sample_period_s + tau0 - p.delay_s) * outer;
        CHECK((h.taps[size_t(d)] - expect).norm() < 1e-12);
    }
}

TEST_CASE("build_channel is additive over paths and homogeneous in gains") {
    const UraGeometry rx{2, 2}, tx{2, 2};
    PulseShape pulse;
    pulse.sample_period_s = 1e-9;
    Path a, b;
    a.gain = cplx(1.0, 0.0);
    a.aoa = UnitDirection::from_xy(0.1, 0.2);
    a.aod = UnitDirection::from_xy(0.3, -0.1);
    a.delay_s = 1.3e-9;
    b.gain = cplx(0.0, 2.0);
    b.aoa = UnitDirection::from_xy(-0.4, 0.0);
    b.aod = UnitDirection::from_xy(0.0, 0.5);
    b.delay_s = 3.7e-9;

    const Path both[2] = {a, b};
    const ChannelTensor h_ab = build_channel({both, 2}, rx, tx, pulse, 6, 0.0);
    const ChannelTensor h_a = build_channel({&a, 1}, rx, tx, pulse, 6, 0.0);
    const ChannelTensor h_b = build_channel({&b, 1}, rx, tx, pulse, 6, 0.0);
    for (int d = 0; d < 6; ++d)
        CHECK((h_ab.taps[size_t(d)] - h_a.taps[size_t(d)] - h_b.taps[size_t(d)]).norm() < 1e-12);

    Path a2 = a;
    a2.gain *= cplx(0.0, 3.0);
    const ChannelTensor h_a2 = build_channel({&a2, 1}, rx, tx, pulse, 6, 0.0);
    for (int d = 0; d < 6; ++d)
        CHECK((h_a2.taps[size_t(d)] - cplx(0.0, 3.0) * h_a.taps[size_t(d)]).norm() < 1e-12);
}

TEST_CASE("empty path list gives an all-zero tensor") {
    const UraGeometry g{2, 2};
    PulseShape pulse;
    const ChannelTensor h = build_channel({}, g, g, pulse, 4, 0.0);
    for (const auto& t : h.taps)
        CHECK(t.norm() == 0.0);
}

TEST_CASE("negative path delay is rejected") {
    const UraGeometry g{2, 2};
    PulseShape pulse;
    Path p;
    p.delay_s = -1.0;
    CHECK_THROWS_AS(build_channel({&p, 1}, g, g, pulse, 4, 0.0), ConfigError);
}
