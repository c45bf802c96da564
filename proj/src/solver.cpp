// SPDX-License-Identifier: Apache-2.0
//
// momploc - joint mmWave channel estimation and localization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "momploc/solver.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

namespace momploc {

namespace {

VectorXcd kron2(const VectorXcd& a, const VectorXcd& b) {
    VectorXcd k(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        k.segment(i * b.size(), b.size()) = a[i] * b;
    return k;
}

void check_dims(const SensingTensor& phi, const DictionarySet& set) {
    if (set.atom_size(0) != phi.n_rx_x || set.atom_size(1) != phi.n_rx_y ||
        set.atom_size(2) != phi.n_tx_x || set.atom_size(3) != phi.n_tx_y ||
        set.atom_size(4) != phi.d_taps)
        throw ShapeError("solver: dictionary atom sizes do not match sensing tensor");
}

MultiIndex unflatten(std::size_t idx, const DictionarySet& set) {
    MultiIndex j{};
    for (int k = 4; k >= 0; --k) {
        const std::size_t n = std::size_t(set.atom_count(k));
        j[size_t(k)] = int(idx % n);
        idx /= n;
    }
    return j;
}

std::vector<MatrixXcd> residual_blocks(const SensingTensor& phi, const VectorXcd& r) {
    const int m_r = phi.m_rx();
    const int q = phi.q_symbols;
    std::vector<MatrixXcd> blocks(size_t(phi.m_frames()));
    for (int m = 0; m < phi.m_frames(); ++m) {
        MatrixXcd b(m_r, q);
        for (int row = 0; row < m_r; ++row)
            for (int col = 0; col < q; ++col)
                b(row, col) = r[Eigen::Index(m) * m_r * q + Eigen::Index(row) * q + col];
        blocks[size_t(m)] = std::move(b);
    }
    return blocks;
}

// Delay-domain correlation: w[q] = sum_d c[d] * vfull[q + D - 1 - d].
VectorXcd delay_mix(const VectorXcd& vfull, const VectorXcd& c, int d_taps, int q_symbols) {
    VectorXcd w(q_symbols);
    for (int q = 0; q < q_symbols; ++q) {
        cplx acc(0.0, 0.0);
        for (int d = 0; d < d_taps; ++d)
            acc += c[d] * vfull[q + d_taps - 1 - d];
        w[q] = acc;
    }
    return w;
}

// Scores one dictionary dimension with the remaining dimensions collapsed
// onto fixed vectors (alternating-maximization inner step).
void sweep_scores(const SensingTensor& phi, const DictionarySet& set,
                  const std::array<VectorXcd, 5>& cur, int dim,
                  const std::vector<MatrixXcd>& res, VectorXcd& corr, VectorXd& norm2) {
    const int d_taps = phi.d_taps;
    const int q = phi.q_symbols;
    const int n_s = set.atom_size(dim);
    const double s = phi.sqrt_p;

    VectorXcd z = VectorXcd::Zero(n_s);
    MatrixXcd g = MatrixXcd::Zero(n_s, n_s);

    for (int m = 0; m < phi.m_frames(); ++m) {
        const MatrixXcd& a = phi.whitened_combiners[size_t(m)];
        const MatrixXcd& b = phi.precoded_pilots[size_t(m)];
        const MatrixXcd& r = res[size_t(m)];

        if (dim == 0 || dim == 1) {
            const VectorXcd a_tc = kron2(cur[2], cur[3]);
            const VectorXcd vfull = b.transpose() * a_tc;
            const VectorXcd w = delay_mix(vfull, cur[4], d_taps, q);
            const int n2 = phi.n_rx_y;
            MatrixXcd atil(a.rows(), n_s);
            if (dim == 0) {
                for (int i1 = 0; i1 < n_s; ++i1)
                    atil.col(i1) = a.middleCols(i1 * n2, n2) * cur[1];
            } else {
                atil.setZero();
                for (int i1 = 0; i1 < phi.n_rx_x; ++i1)
                    atil += cur[0][i1] * a.middleCols(i1 * n2, n2);
            }
            z += s * (atil.adjoint() * (r * w.conjugate()));
            g += (s * s * w.squaredNorm()) * (atil.adjoint() * atil);
        } else {
            const VectorXcd a_r = kron2(cur[0], cur[1]);
            const VectorXcd u = a * a_r;
            MatrixXcd v(n_s, q); // V[i, q] = delay-mixed pilot row i
            if (dim == 4) {
                const VectorXcd a_tc = kron2(cur[2], cur[3]);
                const VectorXcd vfull = b.transpose() * a_tc;
                for (int d = 0; d < d_taps; ++d)
                    for (int qq = 0; qq < q; ++qq)
                        v(d, qq) = vfull[qq + d_taps - 1 - d];
            } else {
                const int n4 = phi.n_tx_y;
                MatrixXcd btil(n_s, b.cols());
                if (dim == 2) {
                    for (int i3 = 0; i3 < n_s; ++i3)
                        btil.row(i3) = cur[3].transpose() * b.middleRows(i3 * n4, n4);
                } else {
                    btil.setZero();
                    for (int i3 = 0; i3 < phi.n_tx_x; ++i3)
                        btil += cur[2][i3] * b.middleRows(i3 * n4, n4);
                }
                for (int i = 0; i < n_s; ++i) {
                    const VectorXcd row = btil.row(i).transpose();
                    const VectorXcd w = delay_mix(row, cur[4], d_taps, q);
                    v.row(i) = w.transpose();
                }
            }
            const Eigen::RowVectorXcd rho = u.adjoint() * r;
            z += s * (v.conjugate() * rho.transpose());
            g += (s * s * u.squaredNorm()) * (v.conjugate() * v.transpose());
        }
    }

    const MatrixXcd& psi = set.psi[size_t(dim)];
    corr = psi.adjoint() * z;
    const MatrixXcd gp = g * psi;
    norm2 = psi.conjugate().cwiseProduct(gp).colwise().sum().real().transpose();
}

struct GreedyState {
    std::vector<MultiIndex> support;
    MatrixXcd atoms; // rows x |support|
    VectorXcd coeffs;
    VectorXcd residual;
    bool rank_deficient = false;
};

// Appends atom j, refits all coefficients jointly and updates the residual.
// Returns false (and leaves the state untouched) when the new atom makes the
// selected set numerically rank deficient.
bool append_and_refit(GreedyState& st, const VectorXcd& y, const MultiIndex& j,
                      const VectorXcd& q_j) {
    const Eigen::Index k = Eigen::Index(st.support.size()) + 1;
    MatrixXcd atoms(y.size(), k);
    if (k > 1)
        atoms.leftCols(k - 1) = st.atoms;
    atoms.col(k - 1) = q_j;
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(atoms);
    if (qr.rank() < k) {
        st.rank_deficient = true;
        return false;
    }
    VectorXcd coeffs = qr.solve(y);
    st.support.push_back(j);
    st.atoms = std::move(atoms);
    st.coeffs = std::move(coeffs);
    st.residual = y - st.atoms * st.coeffs;
    return true;
}

SparseEstimate finish(GreedyState&& st) {
    SparseEstimate est;
    est.support = std::move(st.support);
    est.coeffs = std::move(st.coeffs);
    est.residual_energy = st.residual.squaredNorm();
    est.rank_deficient = st.rank_deficient;
    return est;
}

// First strictly-greater scan: exact ties resolve to the lowest flat index,
// which is the lowest lexicographic multi-index.
std::ptrdiff_t argmax_scores(const VectorXd& scores) {
    std::ptrdiff_t best = -1;
    double best_score = 0.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const double v = scores[i];
        if (std::isfinite(v) && v > best_score) {
            best_score = v;
            best = i;
        }
    }
    return best;
}

} // namespace

VectorXcd measured_atom(const SensingTensor& phi, const DictionarySet& set, const MultiIndex& j) {
    check_dims(phi, set);
    set.check_index(j);
    const int m_r = phi.m_rx();
    const int q = phi.q_symbols;
    const int d_taps = phi.d_taps;
    const VectorXcd a_r = kron2(set.psi[0].col(j[0]), set.psi[1].col(j[1]));
    const VectorXcd a_tc = kron2(set.psi[2].col(j[2]), set.psi[3].col(j[3]));
    const VectorXcd p = set.psi[4].col(j[4]);

    VectorXcd out(phi.rows());
    for (int m = 0; m < phi.m_frames(); ++m) {
        const VectorXcd u = phi.whitened_combiners[size_t(m)] * a_r;
        const VectorXcd vfull = phi.precoded_pilots[size_t(m)].transpose() * a_tc;
        const VectorXcd w = delay_mix(vfull, p, d_taps, q);
        for (int r = 0; r < m_r; ++r)
            for (int c = 0; c < q; ++c)
                out[Eigen::Index(m) * m_r * q + Eigen::Index(r) * q + c] =
                    phi.sqrt_p * u[r] * w[c];
    }
    return out;
}

VectorXd score_all_atoms(const SensingTensor& phi, const DictionarySet& set,
                         const VectorXcd& residual, bool parallel) {
    check_dims(phi, set);
    const std::size_t n = set.total_atoms();
    VectorXd scores = VectorXd::Zero(Eigen::Index(n));
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
        const MultiIndex j = unflatten(std::size_t(i), set);
        const VectorXcd q_j = measured_atom(phi, set, j);
        const double norm2 = q_j.squaredNorm();
        scores[i] = norm2 > 0.0 ? std::norm(q_j.dot(residual)) / norm2 : -1.0;
    }
    return scores;
}

SparseEstimate momp_solve(const Observation& y, const SensingTensor& phi,
                          const DictionarySet& set, const SolverConfig& cfg) {
    cfg.validate();
    check_dims(phi, set);
    if (y.y.size() != phi.rows())
        throw ShapeError("momp_solve: observation length does not match sensing tensor");

    GreedyState st;
    st.residual = y.y;
    const double y_energy = y.y.squaredNorm();
    if (!(y_energy > 0.0) || !std::isfinite(y_energy))
        return finish(std::move(st));

    if (cfg.mode == SolverMode::Exhaustive && set.total_atoms() > cfg.atom_guard)
        throw CapacityError("momp_solve: exhaustive mode exceeds the atom guard");

    // Sweep order: delay first (near-orthogonal sinc atoms anchor the
    // search), then rx-x, rx-y, tx-x, tx-y.
    constexpr int kSweepOrder[5] = {4, 0, 1, 2, 3};

    for (int iter = 0; iter < cfg.n_paths_max; ++iter) {
        MultiIndex j{};
        if (cfg.mode == SolverMode::Exhaustive) {
            const VectorXd scores = score_all_atoms(phi, set, st.residual, cfg.parallel);
            const std::ptrdiff_t best = argmax_scores(scores);
            if (best < 0)
                break;
            j = unflatten(std::size_t(best), set);
        } else {
            const std::vector<MatrixXcd> res = residual_blocks(phi, st.residual);
            std::array<VectorXcd, 5> cur;
            for (int k = 0; k < 5; ++k)
                cur[size_t(k)] = VectorXcd::Ones(set.atom_size(k));
            bool any = true;
            for (int sweep = 0; sweep < cfg.refine_sweeps && any; ++sweep) {
                for (int dim : kSweepOrder) {
                    VectorXcd corr;
                    VectorXd norm2;
                    sweep_scores(phi, set, cur, dim, res, corr, norm2);
                    VectorXd scores(corr.size());
                    for (Eigen::Index i = 0; i < corr.size(); ++i)
                        scores[i] = norm2[i] > 0.0 ? std::norm(corr[i]) / norm2[i] : -1.0;
                    const std::ptrdiff_t best = argmax_scores(scores);
                    if (best < 0) {
                        any = false;
                        break;
                    }
                    j[size_t(dim)] = int(best);
                    cur[size_t(dim)] = set.psi[size_t(dim)].col(Eigen::Index(best));
                }
            }
            if (!any)
                break;
        }

        if (std::find(st.support.begin(), st.support.end(), j) != st.support.end())
            break; // residual is already orthogonal to this atom
        const VectorXcd q_j = measured_atom(phi, set, j);
        if (!(q_j.squaredNorm() > 0.0))
            break;
        if (!append_and_refit(st, y.y, j, q_j))
            break;
        if (st.residual.squaredNorm() / y_energy < cfg.residual_stop_ratio)
            break;
    }
    return finish(std::move(st));
}

namespace {

// Streamed flattened-OMP scoring state; used when the equivalent matrix does
// not fit the memory budget. Cost still scales with the full atom count.
struct StreamedOmp {
    const SensingTensor& phi;
    const DictionarySet& set;
    int n12, n34, n5;
    std::vector<MatrixXcd> u;      // per frame: M_R x n12
    std::vector<MatrixXcd> vfull;  // per frame: (Q+D) x n34
    VectorXd norm2;                // flat atom order (jr, jt, j5)

    StreamedOmp(const SensingTensor& phi_, const DictionarySet& set_) : phi(phi_), set(set_) {
        const int n1a = set.atom_count(0), n2a = set.atom_count(1);
        const int n3a = set.atom_count(2), n4a = set.atom_count(3);
        n5 = set.atom_count(4);
        n12 = n1a * n2a;
        n34 = n3a * n4a;

        MatrixXcd ar(phi.n_rx_x * phi.n_rx_y, n12);
        for (int j0 = 0; j0 < n1a; ++j0)
            for (int j1 = 0; j1 < n2a; ++j1)
                ar.col(j0 * n2a + j1) = kron2(set.psi[0].col(j0), set.psi[1].col(j1));
        MatrixXcd at(phi.n_tx_x * phi.n_tx_y, n34);
        for (int j2 = 0; j2 < n3a; ++j2)
            for (int j3 = 0; j3 < n4a; ++j3)
                at.col(j2 * n4a + j3) = kron2(set.psi[2].col(j2), set.psi[3].col(j3));

        const int m_frames = phi.m_frames();
        u.resize(size_t(m_frames));
        vfull.resize(size_t(m_frames));
        std::vector<MatrixXd> nrx(static_cast<std::size_t>(m_frames));  // m -> n12
        std::vector<MatrixXd> ntd(static_cast<std::size_t>(m_frames));  // m -> n34 x n5
        for (int m = 0; m < m_frames; ++m) {
            u[size_t(m)] = phi.whitened_combiners[size_t(m)] * ar;
            vfull[size_t(m)] = phi.precoded_pilots[size_t(m)].transpose() * at;
            nrx[size_t(m)] = u[size_t(m)].colwise().squaredNorm().transpose();
            ntd[size_t(m)].resize(n34, n5);
            for (int jt = 0; jt < n34; ++jt) {
                const MatrixXcd s = shifted(m, jt);
                const MatrixXcd w = s.transpose() * set.psi[4]; // Q x n5
                ntd[size_t(m)].row(jt) = w.colwise().squaredNorm();
            }
        }
        const double p = phi.sqrt_p * phi.sqrt_p;
        norm2 = VectorXd::Zero(Eigen::Index(n12) * n34 * n5);
        for (int jr = 0; jr < n12; ++jr)
            for (int jt = 0; jt < n34; ++jt)
                for (int j5 = 0; j5 < n5; ++j5) {
                    double acc = 0.0;
                    for (int m = 0; m < m_frames; ++m)
                        acc += nrx[size_t(m)](jr, 0) * ntd[size_t(m)](jt, j5);
                    norm2[(Eigen::Index(jr) * n34 + jt) * n5 + j5] = p * acc;
                }
    }

    // S[d, q] = vfull[q + D - 1 - d, jt]
    MatrixXcd shifted(int m, int jt) const {
        const int d_taps = phi.d_taps;
        const int q = phi.q_symbols;
        MatrixXcd s(d_taps, q);
        for (int d = 0; d < d_taps; ++d)
            for (int qq = 0; qq < q; ++qq)
                s(d, qq) = vfull[size_t(m)](qq + d_taps - 1 - d, jt);
        return s;
    }

    // Correlations q_j^H r for every atom, same flat order as norm2.
    VectorXd scores(const VectorXcd& residual) const {
        const std::vector<MatrixXcd> res = residual_blocks(phi, residual);
        VectorXd sc(norm2.size());
        std::vector<MatrixXcd> rho(size_t(phi.m_frames())); // n12 x Q
        for (int m = 0; m < phi.m_frames(); ++m)
            rho[size_t(m)] = u[size_t(m)].adjoint() * res[size_t(m)];
        const double s2 = phi.sqrt_p * phi.sqrt_p;
#pragma omp parallel for schedule(dynamic)
        for (int jt = 0; jt < n34; ++jt) {
            MatrixXcd gamma = MatrixXcd::Zero(phi.d_taps, n12);
            for (int m = 0; m < phi.m_frames(); ++m)
                gamma += shifted(m, jt).conjugate() * rho[size_t(m)].transpose();
            const MatrixXcd c = set.psi[4].adjoint() * gamma; // n5 x n12
            for (int jr = 0; jr < n12; ++jr)
                for (int j5 = 0; j5 < n5; ++j5) {
                    const Eigen::Index idx = (Eigen::Index(jr) * n34 + jt) * n5 + j5;
                    const double nn = norm2[idx];
                    sc[idx] = nn > 0.0 ? s2 * std::norm(c(j5, jr)) / nn : -1.0;
                }
        }
        return sc;
    }

    MultiIndex unflatten_stream(std::size_t idx) const {
        MultiIndex j{};
        j[4] = int(idx % std::size_t(n5));
        idx /= std::size_t(n5);
        const int jt = int(idx % std::size_t(n34));
        const int jr = int(idx / std::size_t(n34));
        j[2] = jt / set.atom_count(3);
        j[3] = jt % set.atom_count(3);
        j[0] = jr / set.atom_count(1);
        j[1] = jr % set.atom_count(1);
        return j;
    }
};

} // namespace

SparseEstimate omp_solve(const Observation& y, const SensingTensor& phi,
                         const DictionarySet& set, const SolverConfig& cfg) {
    cfg.validate();
    check_dims(phi, set);
    if (y.y.size() != phi.rows())
        throw ShapeError("omp_solve: observation length does not match sensing tensor");
    const std::size_t n_atoms = set.total_atoms();
    if (n_atoms > cfg.atom_guard)
        throw CapacityError("omp_solve: flattened dictionary exceeds the atom guard");

    GreedyState st;
    st.residual = y.y;
    const double y_energy = y.y.squaredNorm();
    if (!(y_energy > 0.0) || !std::isfinite(y_energy))
        return finish(std::move(st));

    const std::size_t bytes = n_atoms * std::size_t(phi.rows()) * sizeof(cplx);
    if (bytes <= cfg.omp_memory_budget_bytes) {
        // Materialized flattened dictionary: the scoring arithmetic is
        // identical to exhaustive MOMP on the same grids.
        MatrixXcd flat(phi.rows(), Eigen::Index(n_atoms));
#pragma omp parallel for schedule(static) if (cfg.parallel)
        for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n_atoms); ++i)
            flat.col(i) = measured_atom(phi, set, unflatten(std::size_t(i), set));

        for (int iter = 0; iter < cfg.n_paths_max; ++iter) {
            VectorXd scores = VectorXd::Zero(Eigen::Index(n_atoms));
#pragma omp parallel for schedule(static) if (cfg.parallel)
            for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n_atoms); ++i) {
                const double norm2 = flat.col(i).squaredNorm();
                scores[i] =
                    norm2 > 0.0 ? std::norm(flat.col(i).dot(st.residual)) / norm2 : -1.0;
            }
            const std::ptrdiff_t best = argmax_scores(scores);
            if (best < 0)
                break;
            const MultiIndex j = unflatten(std::size_t(best), set);
            if (std::find(st.support.begin(), st.support.end(), j) != st.support.end())
                break;
            if (!append_and_refit(st, y.y, j, flat.col(best)))
                break;
            if (st.residual.squaredNorm() / y_energy < cfg.residual_stop_ratio)
                break;
        }
        return finish(std::move(st));
    }

    StreamedOmp stream(phi, set);
    for (int iter = 0; iter < cfg.n_paths_max; ++iter) {
        const VectorXd scores = stream.scores(st.residual);
        const std::ptrdiff_t best = argmax_scores(scores);
        if (best < 0)
            break;
        const MultiIndex j = stream.unflatten_stream(std::size_t(best));
        if (std::find(st.support.begin(), st.support.end(), j) != st.support.end())
            break;
        if (!append_and_refit(st, y.y, j, measured_atom(phi, set, j)))
            break;
        if (st.residual.squaredNorm() / y_energy < cfg.residual_stop_ratio)
            break;
    }
    return finish(std::move(st));
}

ExtractedPaths extract_paths(const SparseEstimate& est, const DictionarySet& set) {
    ExtractedPaths out;
    out.paths.reserve(est.support.size());
    out.clamped.reserve(est.support.size());
    for (std::size_t i = 0; i < est.support.size(); ++i) {
        const MultiIndex& j = est.support[i];
        set.check_index(j);
        bool c_aoa = false, c_aod = false;
        Path p;
        p.aoa = UnitDirection::from_xy(set.grids[0][j[0]], set.grids[1][j[1]], &c_aoa);
        p.aod = UnitDirection::from_xy(set.grids[2][j[2]], set.grids[3][j[3]], &c_aod);
        p.delay_s = set.grids[4][j[4]];
        p.gain = est.coeffs[Eigen::Index(i)];
        out.paths.push_back(p);
        out.clamped.push_back(c_aoa || c_aod);
    }
    return out;
}

} // namespace momploc
