// SPDX-License-Identifier: Apache-2.0
//
// nfura - near-field unsourced random access simulation toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef NFURA_SPARSE_RECOVERY_HPP
#define NFURA_SPARSE_RECOVERY_HPP

#include "core.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

// Joint activity detection and channel estimation for Y = A X B^T + W.
// Rows of X index codebook columns j, columns index dictionary atoms p.

namespace nfura
{

struct ActivityThreshold
{
    enum class Mode
    {
        relative, // value * median row energy over the retained row support
        absolute  // value is the energy threshold itself
    };
    Mode mode = Mode::relative;
    double value = 0.1;
};

struct RecoveryConfig
{
    int k_a = 1;          // row sparsity (or K_max when K_a is unknown)
    int r_sparsity = 1;   // number of retained (row, atom) coefficients
    double tau_sq = 0.0;  // target residual power
    int max_iters = 50;
    ActivityThreshold threshold;
    // Extensions, off by default. ridge > 0 regularises the LS over the merged candidate support with
    // ridge * tr(Lambda) / K; debias re-fits the screened coefficients by plain LS before the residual update.
    double ridge = 0.0;
    bool debias = false;

    void validate() const
    {
        if (k_a < 1 || r_sparsity < 1 || max_iters < 1)
            throw std::invalid_argument("RecoveryConfig: k_a, r_sparsity and max_iters must be positive.");
        if (!(tau_sq >= 0.0))
            throw std::invalid_argument("RecoveryConfig: tau_sq must be non-negative.");
        if (!(ridge >= 0.0))
            throw std::invalid_argument("RecoveryConfig: ridge must be non-negative.");
    }
};

/// tau^2 = ||Y||_F^2 / (scale (SNR + 1)) with scale = 5 by default; for a noiseless link a relative floor
/// replaces zero.
inline double default_tau_sq(const CMat &Y, double snr_db, double scale = 5.0)
{
    if (!(scale > 0.0))
        throw std::invalid_argument("default_tau_sq: scale must be positive.");
    if (std::isinf(snr_db) && snr_db > 0)
        return 1e-20 * Y.squaredNorm();
    return Y.squaredNorm() / (scale * (db_to_linear(snr_db) + 1.0));
}

struct Coefficient
{
    int row = 0;
    int atom = 0;
    cplx value{};

    friend bool operator<(const Coefficient &a, const Coefficient &b)
    {
        return a.row != b.row ? a.row < b.row : a.atom < b.atom;
    }
};

using AtomIndex = std::pair<int, int>; // (row j, atom p)

struct RecoveryState
{
    CMat residual;
    std::vector<int> row_support;            // R_r, ascending
    std::vector<Coefficient> signal_support; // R with its coefficients, ordered by (row, atom)
};

enum class StopReason
{
    target_reached,
    no_improvement,
    max_iters
};

struct RecoveryResult
{
    RecoveryState state;
    std::vector<int> active; // hard activity decision
    int iterations = 0;
    StopReason stop = StopReason::max_iters;
    std::vector<double> residual_history; // ||R(t)||^2 of accepted iterates, starting with ||Y||^2

    bool converged() const { return stop != StopReason::max_iters; }
};

namespace detail
{
inline RVec row_energies(const CMat &m) { return m.rowwise().squaredNorm(); }

inline std::vector<int> select_rows(const RVec &energy, int count, bool *clamped)
{
    const std::size_t want = std::size_t(std::max(count, 0));
    if (clamped)
        *clamped = want > std::size_t(energy.size());
    auto idx = top_k_indices(std::span<const double>(energy.data(), std::size_t(energy.size())), want);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Top `count` entries of |proxy| (rows labelled by `rows`), ties by row-major lowest index.
inline std::vector<AtomIndex> select_entries(const CMat &proxy, const std::vector<int> &rows, int count)
{
    const Eigen::Index R = proxy.rows(), P = proxy.cols();
    std::vector<double> mag(std::size_t(R * P));
    for (Eigen::Index r = 0; r < R; ++r)
        for (Eigen::Index p = 0; p < P; ++p)
            mag[std::size_t(r * P + p)] = std::norm(proxy(r, p));
    const auto idx = top_k_indices(mag, std::size_t(std::max(count, 0)));
    std::vector<AtomIndex> out;
    out.reserve(idx.size());
    for (int i : idx)
        out.emplace_back(rows[std::size_t(i / P)], int(i % P));
    return out;
}

inline double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Hermitian solve with ridge fallback when the reciprocal condition estimate drops below 1e-10.
// A positive `ridge` adds ridge * tr / K to the diagonal unconditionally.
inline CVec solve_gram(const CMat &gram, const CVec &rhs, double ridge = 0.0)
{
    const Eigen::Index K = gram.rows();
    if (ridge > 0.0)
    {
        CMat reg = gram;
        reg.diagonal().array() += ridge * gram.trace().real() / double(std::max<Eigen::Index>(K, 1));
        return Eigen::LDLT<CMat>(reg).solve(rhs);
    }
    Eigen::LDLT<CMat> ldlt(gram);
    if (ldlt.info() == Eigen::Success && ldlt.rcond() > 1e-10)
        return ldlt.solve(rhs);
    const double eps = 1e-8 * gram.trace().real() / double(std::max<Eigen::Index>(K, 1));
    CMat reg = gram;
    reg.diagonal().array() += eps;
    return Eigen::LDLT<CMat>(reg).solve(rhs);
}
} // namespace detail

/// Rows of A^H R with the 2 k_a largest energies (ascending index order).
/// Requests beyond the codebook size are clamped; `clamped` reports it.
inline std::vector<int> row_proxy_select(const CMat &A, const CMat &residual, int k_a, bool *clamped = nullptr)
{
    if (residual.rows() != A.rows())
        throw std::invalid_argument("row_proxy_select: residual must have N rows.");
    const CMat proxy = A.adjoint() * residual;
    return detail::select_rows(detail::row_energies(proxy), 2 * k_a, clamped);
}

/// Proxy A_{K_r}^H R B^*, computed as two matrix products.
inline CMat entry_proxy(const CMat &A, const std::vector<int> &rows, const CMat &residual, const CMat &B)
{
    CMat A_rows(A.rows(), Eigen::Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        A_rows.col(Eigen::Index(i)) = A.col(rows[i]);
    const CMat left = A_rows.adjoint() * residual;
    return left * B.conjugate();
}

/// The 2r largest-magnitude entries of A_{K_r}^H R B^*.
inline std::vector<AtomIndex> entry_proxy_select(const CMat &A, const std::vector<int> &rows, const CMat &residual,
                                                 const CMat &B, int r)
{
    if (rows.empty())
        throw std::invalid_argument("entry_proxy_select: empty row candidate set.");
    return detail::select_entries(entry_proxy(A, rows, residual, B), rows, 2 * r);
}

/// Least squares over atoms a_{rows[k]} cols.col(k)^T:  x = Lambda^{-1} n with
///   Lambda_{kk'} = (a_k^H a_k')(e_k^H e_k'),  n_k = a_k^H Y conj(e_k).
inline CVec ls_on_atoms(const CMat &Y, const CMat &A, const std::vector<int> &rows, const CMat &cols, double ridge = 0.0)
{
    const Eigen::Index K = Eigen::Index(rows.size());
    if (K == 0)
        return CVec(0);
    CMat A_k(A.rows(), K);
    for (Eigen::Index k = 0; k < K; ++k)
        A_k.col(k) = A.col(rows[std::size_t(k)]);
    const CMat gram = (A_k.adjoint() * A_k).cwiseProduct(cols.adjoint() * cols);
    const CMat T = A_k.adjoint() * Y; // K x M
    CVec n(K);
    for (Eigen::Index k = 0; k < K; ++k)
        n(k) = cols.col(k).dot(T.row(k).transpose());
    return detail::solve_gram(gram, n, ridge);
}

/// Gram matrix and right-hand side of the support LS, exposed for stationarity checks.
inline std::pair<CMat, CVec> ls_normal_equations(const CMat &Y, const CMat &A, const CMat &B,
                                                 const std::vector<AtomIndex> &support)
{
    const Eigen::Index K = Eigen::Index(support.size());
    CMat A_k(A.rows(), K), B_k(B.rows(), K);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        A_k.col(k) = A.col(support[std::size_t(k)].first);
        B_k.col(k) = B.col(support[std::size_t(k)].second);
    }
    CMat gram = (A_k.adjoint() * A_k).cwiseProduct(B_k.adjoint() * B_k);
    CVec n(K);
    for (Eigen::Index k = 0; k < K; ++k)
        n(k) = A_k.col(k).dot(Y * B_k.col(k).conjugate());
    return {std::move(gram), std::move(n)};
}

inline CVec ls_on_support(const CMat &Y, const CMat &A, const CMat &B, const std::vector<AtomIndex> &support,
                          double ridge = 0.0)
{
    if (support.empty())
        return CVec(0);
    std::vector<int> rows(support.size());
    CMat cols(B.rows(), Eigen::Index(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k)
    {
        rows[k] = support[k].first;
        cols.col(Eigen::Index(k)) = B.col(support[k].second);
    }
    return ls_on_atoms(Y, A, rows, cols, ridge);
}

/// Spatial rows z_j = sum_p x_{j,p} b_p^T for every row present in `coeffs`.
inline std::map<int, CVec> spatial_rows(const std::vector<Coefficient> &coeffs, const CMat &B)
{
    std::map<int, CVec> out;
    for (const auto &c : coeffs)
    {
        auto [it, inserted] = out.try_emplace(c.row, CVec::Zero(B.rows()));
        it->second += c.value * B.col(c.atom);
    }
    return out;
}

inline CMat residual_of(const CMat &Y, const CMat &A, const std::map<int, CVec> &rows)
{
    CMat R = Y;
    for (const auto &[j, z] : rows)
        R.noalias() -= A.col(j) * z.transpose();
    return R;
}

inline std::vector<int> activity_decision(const std::map<int, double> &row_energy, const std::vector<int> &row_support,
                                          const ActivityThreshold &th)
{
    double upsilon = th.value;
    if (th.mode == ActivityThreshold::Mode::relative)
    {
        std::vector<double> e;
        for (int j : row_support)
        {
            auto it = row_energy.find(j);
            e.push_back(it == row_energy.end() ? 0.0 : it->second);
        }
        upsilon = th.value * detail::median(std::move(e));
    }
    std::vector<int> active;
    for (const auto &[j, en] : row_energy)
        if (en > upsilon)
            active.push_back(j);
    return active;
}

/// Algorithm: S-CoSaMP row detection feeding 2D-CoSaMP atom estimation, iterated until
/// ||R||^2 <= tau^2, no further decrease (the previous state is kept), or max_iters.
inline RecoveryResult turbo_cosamp(const CMat &Y, const CMat &A, const CMat &B, const RecoveryConfig &cfg)
{
    cfg.validate();
    if (Y.rows() != A.rows() || Y.cols() != B.rows())
        throw std::invalid_argument("turbo_cosamp: dimension mismatch between Y, A and B.");

    const CMat B_conj = B.conjugate();
    RecoveryResult out;
    out.state.residual = Y;
    double res_prev = Y.squaredNorm();
    out.residual_history.push_back(res_prev);
    if (res_prev <= cfg.tau_sq)
    {
        out.stop = StopReason::target_reached;
        return out;
    }

    for (int t = 1; t <= cfg.max_iters; ++t)
    {
        out.iterations = t;
        const RecoveryState &prev = out.state;

        // row detection
        const CMat row_proxy = A.adjoint() * prev.residual;
        const auto s_rows = detail::select_rows(detail::row_energies(row_proxy), 2 * cfg.k_a, nullptr);
        const auto k_rows = sorted_union(prev.row_support, s_rows);

        // atom detection restricted to candidate rows
        CMat left(Eigen::Index(k_rows.size()), row_proxy.cols());
        for (std::size_t i = 0; i < k_rows.size(); ++i)
            left.row(Eigen::Index(i)) = row_proxy.row(k_rows[i]);
        const CMat proxy = left * B_conj;
        auto merged = detail::select_entries(proxy, k_rows, 2 * cfg.r_sparsity);
        for (const auto &c : prev.signal_support)
            merged.emplace_back(c.row, c.atom);
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

        const CVec x = ls_on_support(Y, A, B, merged, cfg.ridge);

        // screening: k_a rows by energy, then r largest |x| inside them
        std::map<int, double> energy;
        for (int j : k_rows)
            energy[j] = 0.0;
        for (std::size_t k = 0; k < merged.size(); ++k)
            energy[merged[k].first] += std::norm(x(Eigen::Index(k)));
        RVec e(Eigen::Index(k_rows.size()));
        for (std::size_t i = 0; i < k_rows.size(); ++i)
            e(Eigen::Index(i)) = energy[k_rows[i]];
        std::vector<int> keep_rows;
        for (int i : detail::select_rows(e, cfg.k_a, nullptr))
            keep_rows.push_back(k_rows[std::size_t(i)]);

        std::vector<double> mag(merged.size(), -1.0);
        for (std::size_t k = 0; k < merged.size(); ++k)
            if (std::binary_search(keep_rows.begin(), keep_rows.end(), merged[k].first))
                mag[k] = std::abs(x(Eigen::Index(k)));
        RecoveryState next;
        next.row_support = keep_rows;
        for (int k : top_k_indices(mag, std::size_t(cfg.r_sparsity)))
            if (mag[std::size_t(k)] >= 0.0)
                next.signal_support.push_back({merged[std::size_t(k)].first, merged[std::size_t(k)].second, x(k)});
        std::sort(next.signal_support.begin(), next.signal_support.end());

        if (cfg.debias)
        {
            std::vector<AtomIndex> sup;
            for (auto &c : next.signal_support)
                sup.emplace_back(c.row, c.atom);
            const CVec xr = ls_on_support(Y, A, B, sup);
            for (std::size_t k = 0; k < sup.size(); ++k)
                next.signal_support[k].value = xr(Eigen::Index(k));
        }
        next.residual = residual_of(Y, A, spatial_rows(next.signal_support, B));
        const double res = next.residual.squaredNorm();
        if (!(res < res_prev))
        {
            out.stop = StopReason::no_improvement;
            break;
        }
        out.state = std::move(next);
        res_prev = res;
        out.residual_history.push_back(res);
        if (res <= cfg.tau_sq)
        {
            out.stop = StopReason::target_reached;
            break;
        }
    }

    std::map<int, double> row_energy;
    for (const auto &c : out.state.signal_support)
        row_energy[c.row] += std::norm(c.value);
    out.active = activity_decision(row_energy, out.state.row_support, cfg.threshold);
    return out;
}

/// Residual bound ||X_hat - X||_F <= (||R||_F + sqrt(NM) sigma) / sqrt(1 - eps).
struct ResidualBoundReport
{
    double error = 0.0;
    double bound = 0.0;
    bool holds = false;
};

inline double coefficient_distance(const std::vector<Coefficient> &a, const std::vector<Coefficient> &b)
{
    std::map<AtomIndex, cplx> diff;
    for (const auto &c : a)
        diff[{c.row, c.atom}] += c.value;
    for (const auto &c : b)
        diff[{c.row, c.atom}] -= c.value;
    double s = 0.0;
    for (const auto &[k, v] : diff)
        s += std::norm(v);
    return std::sqrt(s);
}

inline ResidualBoundReport residual_bound_check(const std::vector<Coefficient> &x_true, const std::vector<Coefficient> &x_hat,
                                     const CMat &residual, double sigma, double eps)
{
    ResidualBoundReport rep;
    rep.error = coefficient_distance(x_true, x_hat);
    if (!(eps < 1.0))
    {
        rep.bound = std::numeric_limits<double>::infinity();
        rep.holds = false; // no finite bound without a restricted isometry below one
        return rep;
    }
    const double nm = double(residual.rows() * residual.cols());
    rep.bound = (residual.norm() + std::sqrt(nm) * sigma) / std::sqrt(1.0 - eps);
    rep.holds = rep.error <= rep.bound;
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Baselines

struct SompResult
{
    std::vector<int> rows; // selection order
    CMat z;                // |rows| x M spatial estimates, aligned with `rows`
    std::vector<int> active;
    bool unreliable = false; // k_a > N: beyond the MMV identifiability regime
};

/// Simultaneous OMP: greedy row selection by A^H R row energy, LS refit of Z on the chosen rows.
inline SompResult s_omp(const CMat &Y, const CMat &A, int k_a, const ActivityThreshold &th = {})
{
    if (k_a < 1)
        throw std::invalid_argument("s_omp: k_a must be positive.");
    SompResult out;
    out.unreliable = k_a > A.rows();
    CMat R = Y;
    CMat A_s(A.rows(), 0);
    const int steps = std::min<int>(k_a, int(A.cols()));
    for (int i = 0; i < steps; ++i)
    {
        RVec e = detail::row_energies(A.adjoint() * R);
        for (int j : out.rows)
            e(j) = -1.0;
        const int pick = top_k_indices(std::span<const double>(e.data(), std::size_t(e.size())), 1).front();
        out.rows.push_back(pick);
        A_s.conservativeResize(Eigen::NoChange, A_s.cols() + 1);
        A_s.col(A_s.cols() - 1) = A.col(pick);
        out.z = Eigen::CompleteOrthogonalDecomposition<CMat>(A_s).solve(Y);
        R = Y - A_s * out.z;
    }
    std::map<int, double> energy;
    for (std::size_t i = 0; i < out.rows.size(); ++i)
        energy[out.rows[i]] = out.z.row(Eigen::Index(i)).squaredNorm();
    std::vector<int> sorted_rows(out.rows);
    std::sort(sorted_rows.begin(), sorted_rows.end());
    out.active = activity_decision(energy, sorted_rows, th);
    return out;
}

/// Plain OMP of a single vector z against the columns of B.
inline std::vector<std::pair<int, cplx>> omp(const CMat &B, const CVec &z, int sparsity)
{
    std::vector<int> support;
    CVec coef;
    CVec r = z;
    for (int i = 0; i < sparsity && i < B.cols(); ++i)
    {
        RVec c = (B.adjoint() * r).cwiseAbs2();
        for (int p : support)
            c(p) = -1.0;
        support.push_back(top_k_indices(std::span<const double>(c.data(), std::size_t(c.size())), 1).front());
        CMat B_s(B.rows(), Eigen::Index(support.size()));
        for (std::size_t k = 0; k < support.size(); ++k)
            B_s.col(Eigen::Index(k)) = B.col(support[k]);
        coef = Eigen::CompleteOrthogonalDecomposition<CMat>(B_s).solve(z);
        r = z - B_s * coef;
    }
    std::vector<std::pair<int, cplx>> out;
    for (std::size_t k = 0; k < support.size(); ++k)
        out.emplace_back(support[k], coef(Eigen::Index(k)));
    return out;
}

struct TwoStageResult
{
    SompResult spatial;
    std::vector<Coefficient> coefficients; // polar-domain estimate
    std::map<int, CVec> rows;              // re-synthesised spatial rows B x_j
};

/// S-OMP for the spatial rows, then OMP of every row against the dictionary.
inline TwoStageResult two_stage(const CMat &Y, const CMat &A, const CMat &B, int k_a, int per_row_sparsity,
                                const ActivityThreshold &th = {})
{
    TwoStageResult out;
    out.spatial = s_omp(Y, A, k_a, th);
    for (std::size_t i = 0; i < out.spatial.rows.size(); ++i)
    {
        const int j = out.spatial.rows[i];
        const CVec z = out.spatial.z.row(Eigen::Index(i)).transpose();
        CVec synth = CVec::Zero(B.rows());
        for (const auto &[p, v] : omp(B, z, per_row_sparsity))
        {
            out.coefficients.push_back({j, p, v});
            synth += v * B.col(p);
        }
        out.rows[j] = synth;
    }
    std::sort(out.coefficients.begin(), out.coefficients.end());
    return out;
}

} // namespace nfura

#endif
