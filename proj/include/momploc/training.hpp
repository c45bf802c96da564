// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_TRAINING_HPP
#define MOMPLOC_TRAINING_HPP

#include <utility>
#include <vector>

#include "momploc/rng.hpp"
#include "momploc/types.hpp"

namespace momploc {

struct TrainingConfig {
    int m_frames = 32;      // M
    int m_tx_chains = 1;    // M_T (= N_s during training)
    int m_rx_chains = 1;    // M_R
    int q_symbols = 1;      // Q
    int d_taps = 1;         // D
    double tx_power_w = 1.0;
    double noise_power_w = 0.0;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (m_frames < 1 || m_tx_chains < 1 || m_rx_chains < 1 || q_symbols < 1 || d_taps < 1)
            throw ConfigError("TrainingConfig: counts must be >= 1");
        if (tx_power_w < 0.0)
            throw ConfigError("TrainingConfig: tx_power_w must be >= 0");
    }
};

// Per-frame hybrid precoder/combiner, pilot block and whitening factor.
struct TrainingFrame {
    MatrixXcd precoder; // F_m, N_T x M_T
    MatrixXcd combiner; // W_m, N_R x M_R
    MatrixXcd pilot;    // S_m, M_T x (Q+D)
    MatrixXcd whitener; // L_m lower triangular, L L^H = W^H W
};

// Whitened observations stacked per index m*M_R*Q + m_R*Q + q.
struct Observation {
    VectorXcd y;
    int m = 0;
    int m_r = 0;
    int q = 0;
};

// Zero-padded Hadamard pilot block. The Hadamard order is the width of the
// nonzero block, (Q+D) - pad_left - pad_right; it must be a power of two
// >= M_T. Rows are the first M_T Hadamard rows.
MatrixXcd make_pilots(const TrainingConfig& cfg, int pad_left, int pad_right);

// Training precoder/combiner for one frame (1-based frame_index): M_T / M_R
// columns of the Kronecker-DFT codebook, selected round-robin with the
// transmitter group advancing fastest.
std::pair<MatrixXcd, MatrixXcd> make_codebooks(const TrainingConfig& cfg,
                                               const UraGeometry& n_tx, const UraGeometry& n_rx,
                                               int frame_index);

// All M frames: shared pilot block, per-frame codebooks and whiteners.
std::vector<TrainingFrame> make_training_frames(const TrainingConfig& cfg,
                                                const UraGeometry& n_tx,
                                                const UraGeometry& n_rx);

// Received block Y_m of one training frame,
//   [Y_m]_{:,q} = sqrt(P) sum_d W^H H_d F [S]_{:,q+D-d} + W^H [N]_{:,q},
// with N i.i.d. circular complex Gaussian of variance noise_power_w.
MatrixXcd simulate_rx(const ChannelTensor& channel, const TrainingFrame& frame,
                      const TrainingConfig& cfg, Rng& rng);

// Forward substitution with the frame's Cholesky factor, L X = Y.
MatrixXcd whiten(const TrainingFrame& frame, const MatrixXcd& y_m);

Observation assemble_observation(const std::vector<TrainingFrame>& frames,
                                 const std::vector<MatrixXcd>& received);

// Inverse of assemble_observation.
std::vector<MatrixXcd> split_observation(const Observation& obs);

// Factored sensing operator. Row (m, m_R, q), column multi-index i:
//   Phi[row, i] = sqrt(P) [L^-1 W^H]_{m_R, i1*NRy+i2} [F S]_{i3*NTy+i4, q+D-i5}.
// Kept factored per frame; dense materialization is for tiny tests only.
struct SensingTensor {
    double sqrt_p = 1.0;
    std::vector<MatrixXcd> whitened_combiners; // L^-1 W^H per frame, M_R x N_R
    std::vector<MatrixXcd> precoded_pilots;    // F S per frame, N_T x (Q+D)
    int n_rx_x = 1, n_rx_y = 1;
    int n_tx_x = 1, n_tx_y = 1;
    int d_taps = 1;
    int q_symbols = 1;

    int m_frames() const { return int(whitened_combiners.size()); }
    int m_rx() const { return int(whitened_combiners[0].rows()); }
    int rows() const { return m_frames() * m_rx() * q_symbols; }

    cplx entry(int row, int i1, int i2, int i3, int i4, int i5) const;
    // Column for flattened tensor index i (i1 slowest, i5 fastest).
    VectorXcd column(std::size_t flat_i) const;
    std::size_t n_columns() const {
        return std::size_t(n_rx_x) * n_rx_y * n_tx_x * n_tx_y * std::size_t(d_taps);
    }
    MatrixXcd materialize_dense() const;
    // Contraction with a channel tensor; reproduces the whitened noiseless
    // observation.
    VectorXcd apply(const ChannelTensor& h) const;
};

SensingTensor build_sensing(const std::vector<TrainingFrame>& frames, const TrainingConfig& cfg,
                            const UraGeometry& n_tx, const UraGeometry& n_rx);

// Binary observation dump: 4-byte LE header length, JSON header
// {"M","M_R","Q","layout":"eq7"}, then interleaved little-endian complex64.
void save_observation(const std::string& path, const Observation& obs);
Observation load_observation(const std::string& path);

} // namespace momploc

#endif
