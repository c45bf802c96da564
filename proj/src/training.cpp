// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/training.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <json.hpp>

namespace momploc {

namespace {

bool is_power_of_two(int n) {
    return n > 0 && (n & (n - 1)) == 0;
}

// Sylvester-construction Hadamard matrix, entries +-1.
MatrixXd hadamard(int order) {
    MatrixXd h(1, 1);
    h(0, 0) = 1.0;
    while (h.rows() < order) {
        MatrixXd g(h.rows() * 2, h.cols() * 2);
        g << h, h, h, -h;
        h = std::move(g);
    }
    return h;
}

MatrixXcd kron_dft(int nx, int ny) {
    auto dft = [](int n) {
        MatrixXcd f(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                f(r, c) = std::polar(1.0, -2.0 * std::numbers::pi * r * c / n);
        return f;
    };
    const MatrixXcd fx = dft(nx);
    const MatrixXcd fy = dft(ny);
    MatrixXcd k(nx * ny, nx * ny);
    for (int rx = 0; rx < nx; ++rx)
        for (int cx = 0; cx < nx; ++cx)
            k.block(rx * ny, cx * ny, ny, ny) = fx(rx, cx) * fy;
    return k;
}

MatrixXcd cholesky_whitener(const MatrixXcd& combiner) {
    const MatrixXcd gram = combiner.adjoint() * combiner;
    Eigen::LLT<MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw DegenerateCombinerError("combiner Gram matrix is not positive definite");
    return MatrixXcd(llt.matrixL());
}

} // namespace

MatrixXcd make_pilots(const TrainingConfig& cfg, int pad_left, int pad_right) {
    cfg.validate();
    const int total = cfg.q_symbols + cfg.d_taps;
    const int order = total - pad_left - pad_right;
    if (pad_left < 0 || pad_right < 0 || order <= 0)
        throw ConfigError("make_pilots: padding does not fit in Q+D columns");
    if (!is_power_of_two(order))
        throw ConfigError("make_pilots: Hadamard order must be a power of two");
    if (cfg.m_tx_chains > order)
        throw ConfigError("make_pilots: M_T exceeds the Hadamard order");

    const MatrixXd had = hadamard(order);
    MatrixXcd s = MatrixXcd::Zero(cfg.m_tx_chains, total);
    s.block(0, pad_left, cfg.m_tx_chains, order) =
        had.topRows(cfg.m_tx_chains).cast<cplx>();
    return s;
}

std::pair<MatrixXcd, MatrixXcd> make_codebooks(const TrainingConfig& cfg,
                                               const UraGeometry& n_tx, const UraGeometry& n_rx,
                                               int frame_index) {
    cfg.validate();
    n_tx.validate();
    n_rx.validate();
    if (frame_index < 1 || frame_index > cfg.m_frames)
        throw ConfigError("make_codebooks: frame_index out of range");
    const int nt = n_tx.size();
    const int nr = n_rx.size();
    if (cfg.m_tx_chains > nt || cfg.m_rx_chains > nr)
        throw ConfigError("make_codebooks: more RF chains than antennas");

    const int groups_tx = (nt + cfg.m_tx_chains - 1) / cfg.m_tx_chains;
    const int groups_rx = (nr + cfg.m_rx_chains - 1) / cfg.m_rx_chains;
    const int f0 = frame_index - 1;
    const int gt = f0 % groups_tx;
    const int gr = (f0 / groups_tx) % groups_rx;

    const MatrixXcd dft_tx = kron_dft(n_tx.nx, n_tx.ny);
    const MatrixXcd dft_rx = kron_dft(n_rx.nx, n_rx.ny);

    MatrixXcd precoder(nt, cfg.m_tx_chains);
    for (int i = 0; i < cfg.m_tx_chains; ++i)
        precoder.col(i) = dft_tx.col((gt * cfg.m_tx_chains + i) % nt);
    MatrixXcd combiner(nr, cfg.m_rx_chains);
    for (int i = 0; i < cfg.m_rx_chains; ++i)
        combiner.col(i) = dft_rx.col((gr * cfg.m_rx_chains + i) % nr);
    return {std::move(precoder), std::move(combiner)};
}

std::vector<TrainingFrame> make_training_frames(const TrainingConfig& cfg,
                                                const UraGeometry& n_tx,
                                                const UraGeometry& n_rx) {
    cfg.validate();
    // Default pilot: left padding of D columns, then the widest power-of-two
    // Hadamard block that fits in the remaining Q columns.
    int order = 1;
    while (order * 2 <= cfg.q_symbols)
        order *= 2;
    const MatrixXcd pilot = make_pilots(cfg, cfg.d_taps, cfg.q_symbols - order);
    std::vector<TrainingFrame> frames;
    frames.reserve(size_t(cfg.m_frames));
    for (int m = 1; m <= cfg.m_frames; ++m) {
        auto [f, w] = make_codebooks(cfg, n_tx, n_rx, m);
        TrainingFrame frame;
        frame.precoder = std::move(f);
        frame.combiner = std::move(w);
        frame.pilot = pilot;
        frame.whitener = cholesky_whitener(frame.combiner);
        frames.push_back(std::move(frame));
    }
    return frames;
}

MatrixXcd simulate_rx(const ChannelTensor& channel, const TrainingFrame& frame,
                      const TrainingConfig& cfg, Rng& rng) {
    cfg.validate();
    const int d = channel.d_taps();
    const int q = cfg.q_symbols;
    if (frame.pilot.cols() != q + d)
        throw ShapeError("simulate_rx: pilot must have Q+D columns");
    if (d != cfg.d_taps)
        throw ShapeError("simulate_rx: channel tap count does not match config");
    if (frame.precoder.rows() != channel.n_tx() || frame.combiner.rows() != channel.n_rx())
        throw ShapeError("simulate_rx: array size mismatch");

    const int m_r = int(frame.combiner.cols());
    const double sqrt_p = std::sqrt(cfg.tx_power_w);

    // G_d = W^H H_d F, then per-symbol convolution with the pilot columns.
    MatrixXcd y = MatrixXcd::Zero(m_r, q);
    for (int dd = 0; dd < d; ++dd) {
        const MatrixXcd g = frame.combiner.adjoint() * channel.taps[size_t(dd)] * frame.precoder;
        // 1-based: column q + D - d of S; 0-based: q0 + (D-1) - d0.
        for (int q0 = 0; q0 < q; ++q0)
            y.col(q0) += g * frame.pilot.col(q0 + d - 1 - dd);
    }
    y *= sqrt_p;

    if (cfg.noise_power_w != 0.0) {
        MatrixXcd noise(channel.n_rx(), q);
        for (int c = 0; c < q; ++c)
            for (int r = 0; r < channel.n_rx(); ++r)
                noise(r, c) = rng.complex_gaussian(cfg.noise_power_w);
        y += frame.combiner.adjoint() * noise;
    }
    return y;
}

MatrixXcd whiten(const TrainingFrame& frame, const MatrixXcd& y_m) {
    if (frame.whitener.rows() != y_m.rows())
        throw ShapeError("whiten: whitener/block size mismatch");
    return frame.whitener.triangularView<Eigen::Lower>().solve(y_m);
}

Observation assemble_observation(const std::vector<TrainingFrame>& frames,
                                 const std::vector<MatrixXcd>& received) {
    if (frames.size() != received.size())
        throw ShapeError("assemble_observation: frame/block count mismatch");
    if (frames.empty())
        throw ShapeError("assemble_observation: empty input");
    const int m_r = int(received[0].rows());
    const int q = int(received[0].cols());
    Observation obs;
    obs.m = int(frames.size());
    obs.m_r = m_r;
    obs.q = q;
    obs.y.resize(Eigen::Index(obs.m) * m_r * q);
    for (int m = 0; m < obs.m; ++m) {
        if (received[size_t(m)].rows() != m_r || received[size_t(m)].cols() != q)
            throw ShapeError("assemble_observation: ragged received blocks");
        for (int r = 0; r < m_r; ++r)
            for (int c = 0; c < q; ++c)
                obs.y[Eigen::Index(m) * m_r * q + Eigen::Index(r) * q + c] =
                    received[size_t(m)](r, c);
    }
    return obs;
}

std::vector<MatrixXcd> split_observation(const Observation& obs) {
    std::vector<MatrixXcd> blocks(size_t(obs.m));
    for (int m = 0; m < obs.m; ++m) {
        MatrixXcd b(obs.m_r, obs.q);
        for (int r = 0; r < obs.m_r; ++r)
            for (int c = 0; c < obs.q; ++c)
                b(r, c) = obs.y[Eigen::Index(m) * obs.m_r * obs.q + Eigen::Index(r) * obs.q + c];
        blocks[size_t(m)] = std::move(b);
    }
    return blocks;
}

cplx SensingTensor::entry(int row, int i1, int i2, int i3, int i4, int i5) const {
    const int m_r = m_rx();
    const int m = row / (m_r * q_symbols);
    const int rem = row % (m_r * q_symbols);
    const int r = rem / q_symbols;
    const int q0 = rem % q_symbols;
    const int rx_flat = i1 * n_rx_y + i2;
    const int tx_flat = i3 * n_tx_y + i4;
    const int col = q0 + d_taps - 1 - i5;
    return sqrt_p * whitened_combiners[size_t(m)](r, rx_flat) *
           precoded_pilots[size_t(m)](tx_flat, col);
}

VectorXcd SensingTensor::column(std::size_t flat_i) const {
    const std::size_t nd = std::size_t(d_taps);
    const std::size_t n4 = std::size_t(n_tx_y);
    const std::size_t n3 = std::size_t(n_tx_x);
    const std::size_t n2 = std::size_t(n_rx_y);
    const int i5 = int(flat_i % nd);
    flat_i /= nd;
    const int i4 = int(flat_i % n4);
    flat_i /= n4;
    const int i3 = int(flat_i % n3);
    flat_i /= n3;
    const int i2 = int(flat_i % n2);
    const int i1 = int(flat_i / n2);
    VectorXcd col(rows());
    for (int row = 0; row < rows(); ++row)
        col[row] = entry(row, i1, i2, i3, i4, i5);
    return col;
}

MatrixXcd SensingTensor::materialize_dense() const {
    MatrixXcd phi(rows(), Eigen::Index(n_columns()));
    for (std::size_t i = 0; i < n_columns(); ++i)
        phi.col(Eigen::Index(i)) = column(i);
    return phi;
}

VectorXcd SensingTensor::apply(const ChannelTensor& h) const {
    const int m_r = m_rx();
    const int q = q_symbols;
    if (h.n_rx() != n_rx_x * n_rx_y || h.n_tx() != n_tx_x * n_tx_y || h.d_taps() != d_taps)
        throw ShapeError("SensingTensor::apply: channel shape mismatch");
    VectorXcd y(Eigen::Index(m_frames()) * m_r * q);
    for (int m = 0; m < m_frames(); ++m) {
        MatrixXcd block = MatrixXcd::Zero(m_r, q);
        for (int d = 0; d < d_taps; ++d) {
            const MatrixXcd g = whitened_combiners[size_t(m)] * h.taps[size_t(d)];
            for (int q0 = 0; q0 < q; ++q0)
                block.col(q0) += g * precoded_pilots[size_t(m)].col(q0 + d_taps - 1 - d);
        }
        block *= sqrt_p;
        for (int r = 0; r < m_r; ++r)
            for (int c = 0; c < q; ++c)
                y[Eigen::Index(m) * m_r * q + Eigen::Index(r) * q + c] = block(r, c);
    }
    return y;
}

SensingTensor build_sensing(const std::vector<TrainingFrame>& frames, const TrainingConfig& cfg,
                            const UraGeometry& n_tx, const UraGeometry& n_rx) {
    cfg.validate();
    if (frames.empty())
        throw ShapeError("build_sensing: no frames");
    SensingTensor phi;
    phi.sqrt_p = std::sqrt(cfg.tx_power_w);
    phi.n_rx_x = n_rx.nx;
    phi.n_rx_y = n_rx.ny;
    phi.n_tx_x = n_tx.nx;
    phi.n_tx_y = n_tx.ny;
    phi.d_taps = cfg.d_taps;
    phi.q_symbols = cfg.q_symbols;
    phi.whitened_combiners.reserve(frames.size());
    phi.precoded_pilots.reserve(frames.size());
    for (const TrainingFrame& f : frames) {
        if (f.pilot.cols() != cfg.q_symbols + cfg.d_taps)
            throw ShapeError("build_sensing: pilot must have Q+D columns");
        phi.whitened_combiners.push_back(
            f.whitener.triangularView<Eigen::Lower>().solve(f.combiner.adjoint()));
        phi.precoded_pilots.push_back(f.precoder * f.pilot);
    }
    return phi;
}

void save_observation(const std::string& path, const Observation& obs) {
    nlohmann::json header = {{"M", obs.m}, {"M_R", obs.m_r}, {"Q", obs.q}, {"layout", "eq7"}};
    const std::string htext = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("save_observation: cannot open " + path);
    const std::uint32_t hlen = std::uint32_t(htext.size());
    char lenb[4] = {char(hlen & 0xff), char((hlen >> 8) & 0xff), char((hlen >> 16) & 0xff),
                    char((hlen >> 24) & 0xff)};
    out.write(lenb, 4);
    out.write(htext.data(), std::streamsize(htext.size()));
    std::vector<float> buf(size_t(obs.y.size()) * 2);
    for (Eigen::Index i = 0; i < obs.y.size(); ++i) {
        buf[size_t(i) * 2] = float(obs.y[i].real());
        buf[size_t(i) * 2 + 1] = float(obs.y[i].imag());
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size() * sizeof(float)));
}

Observation load_observation(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("load_observation: cannot open " + path);
    unsigned char lenb[4];
    in.read(reinterpret_cast<char*>(lenb), 4);
    const std::uint32_t hlen = std::uint32_t(lenb[0]) | (std::uint32_t(lenb[1]) << 8) |
                               (std::uint32_t(lenb[2]) << 16) | (std::uint32_t(lenb[3]) << 24);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    const nlohmann::json header = nlohmann::json::parse(htext);
    if (header.at("layout").get<std::string>() != "eq7")
        throw ConfigError("load_observation: unknown layout");
    Observation obs;
    obs.m = header.at("M").get<int>();
    obs.m_r = header.at("M_R").get<int>();
    obs.q = header.at("Q").get<int>();
    const Eigen::Index n = Eigen::Index(obs.m) * obs.m_r * obs.q;
    std::vector<float> buf(size_t(n) * 2);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
    if (!in)
        throw ConfigError("load_observation: truncated payload");
    obs.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        obs.y[i] = cplx(buf[size_t(i) * 2], buf[size_t(i) * 2 + 1]);
    return obs;
}

} // namespace momploc
