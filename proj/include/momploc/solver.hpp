// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef MOMPLOC_SOLVER_HPP
#define MOMPLOC_SOLVER_HPP

#include <vector>

#include "momploc/dictionaries.hpp"
#include "momploc/training.hpp"

namespace momploc {

enum class SolverMode { Alternating, Exhaustive };

struct SolverConfig {
    int n_paths_max = 10;     // greedy iterations (sparsity budget)
    int refine_sweeps = 2;    // alternating-maximization passes per iteration
    SolverMode mode = SolverMode::Alternating;
    double residual_stop_ratio = 0.01;
    bool parallel = true;     // OpenMP scoring; results are schedule-independent
    std::size_t atom_guard = std::size_t(1) << 26; // max scored atoms for flat scans
    std::size_t omp_memory_budget_bytes = std::size_t(1) << 30;

    void validate() const {
        if (n_paths_max < 1 || refine_sweeps < 1)
            throw ConfigError("SolverConfig: n_paths_max and refine_sweeps must be >= 1");
        if (residual_stop_ratio < 0.0)
            throw ConfigError("SolverConfig: residual_stop_ratio must be >= 0");
    }
};

struct SparseEstimate {
    std::vector<MultiIndex> support;
    VectorXcd coeffs;               // joint least-squares fit on the support
    double residual_energy = 0.0;
    bool rank_deficient = false;
};

struct ExtractedPaths {
    std::vector<Path> paths;        // relative delays, z-completed directions
    std::vector<bool> clamped;      // true when (x,y) had to be clamped to the unit circle
};

// Observation-domain image of dictionary atom j: the contraction of the
// factored sensing tensor with the rank-1 atom tensor. Never materializes
// the dense 6-way tensor.
VectorXcd measured_atom(const SensingTensor& phi, const DictionarySet& set, const MultiIndex& j);

// Normalized correlation scores |<r, q_j>|^2 / ||q_j||^2 for every atom in
// lexicographic order (j1 slowest, j5 fastest). Atoms with zero measured
// energy score -1. The parallel variant fills the same array with OpenMP
// and is bitwise identical to the serial one.
VectorXd score_all_atoms(const SensingTensor& phi, const DictionarySet& set,
                         const VectorXcd& residual, bool parallel);

SparseEstimate momp_solve(const Observation& y, const SensingTensor& phi,
                          const DictionarySet& set, const SolverConfig& cfg);

// Baseline OMP over the flattened Kronecker dictionary. Scores every column
// of the (M*M_R*Q) x prod(N_k^a) equivalent matrix; materializes it when it
// fits the memory budget and streams it otherwise. Throws CapacityError when
// the atom count exceeds the guard.
SparseEstimate omp_solve(const Observation& y, const SensingTensor& phi,
                         const DictionarySet& set, const SolverConfig& cfg);

ExtractedPaths extract_paths(const SparseEstimate& est, const DictionarySet& set);

} // namespace momploc

#endif
