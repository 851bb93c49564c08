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

#ifndef NFURA_OFFGRID_REFINE_HPP
#define NFURA_OFFGRID_REFINE_HPP

#include "array_geometry.hpp"
#include "polar_dictionary.hpp"
#include "sparse_recovery.hpp"

namespace nfura
{

inline constexpr double kThetaGuard = 1e-6;
inline constexpr double kMaxDistance = 1e7; // stands in for a plane-wave atom

/// One continuous atom g a_j e_n^T(theta, d).
struct AtomParam
{
    cplx gain{};
    int row = 0;
    double theta = 0.0;
    double distance = kMaxDistance;
};

struct RefineConfig
{
    int t_local = 3;      // local refinement rounds per new atom
    int t_cyclic = 3;     // cyclic sweeps over the merged set
    int newton_steps = 1; // Newton steps per refinement round

    void validate() const
    {
        if (t_local < 0 || t_cyclic < 0 || newton_steps < 0)
            throw std::invalid_argument("RefineConfig: refinement counts must be non-negative.");
    }
};

struct ObjectiveDerivatives
{
    double value = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero(); // (theta, d)
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

struct NewtonOutcome
{
    double theta = 0.0;
    double distance = 0.0;
    bool accepted = false;
};

namespace detail
{
// u = R^T a^*, so that a^H R e^* = e^H u.
inline CVec matched_row(const CMat &R, const CVec &a) { return R.transpose() * a.conjugate(); }

inline double clamp_theta(double t) { return std::clamp(t, -1.0 + kThetaGuard, 1.0 - kThetaGuard); }

inline double clamp_distance(const ArrayConfig &cfg, double d)
{
    return std::clamp(d, cfg.fresnel_distance(), kMaxDistance);
}

inline ObjectiveDerivatives derivatives_from_u(const ArrayConfig &cfg, const CVec &u, double a_norm2, const AtomParam &atom)
{
    // E = 2Re{g^* e^H u} - |g|^2 ||a||^2 ||e||^2, v = u - g ||a||^2 e
    //   dE/dx     = 2Re{g^* (e_x)^H v}
    //   d2E/dx dy = 2Re{g^* (e_xy)^H v - |g|^2 ||a||^2 (e_x)^H e_y}
    const ResponseJet jet = near_response_jet(cfg, atom.theta, atom.distance);
    const cplx g = atom.gain;
    const double g2 = std::norm(g) * a_norm2;
    const CVec v = u - g * a_norm2 * jet.e;
    const auto re = [&](const CVec &x) { return 2.0 * (std::conj(g) * x.dot(v)).real(); };

    ObjectiveDerivatives out;
    out.value = 2.0 * (std::conj(g) * jet.e.dot(u)).real() - g2 * jet.e.squaredNorm();
    out.grad << re(jet.d_theta), re(jet.d_dist);
    const double h_tt = re(jet.d_theta2) - 2.0 * g2 * jet.d_theta.squaredNorm();
    const double h_dd = re(jet.d_dist2) - 2.0 * g2 * jet.d_dist.squaredNorm();
    const double h_td = re(jet.d_theta_dist) - 2.0 * g2 * jet.d_theta.dot(jet.d_dist).real();
    out.hess << h_tt, h_td, h_td, h_dd;
    return out;
}

inline double match_power(const ArrayConfig &cfg, const CVec &u, double theta, double d)
{
    return std::norm(near_response(cfg, theta, d).dot(u));
}

inline NewtonOutcome newton_from_u(const ArrayConfig &cfg, const CVec &u, double a_norm2, const AtomParam &atom)
{
    NewtonOutcome out{atom.theta, atom.distance, false};
    const ObjectiveDerivatives der = derivatives_from_u(cfg, u, a_norm2, atom);
    const Eigen::Matrix2d &H = der.hess;
    const double det = H.determinant();
    const double scale = std::abs(H(0, 0) * H(1, 1)) + std::abs(H(0, 1) * H(1, 0));
    if (!(scale > 0.0) || std::abs(det) < 1e-14 * scale)
        return out;
    if (!(det > 0.0 && H(0, 0) < 0.0))
        return out;
    const Eigen::Vector2d step = H.inverse() * der.grad;
    const double theta = clamp_theta(atom.theta - step(0));
    const double d = clamp_distance(cfg, atom.distance - step(1));
    if (!std::isfinite(theta) || !std::isfinite(d))
        return out;
    if (!(match_power(cfg, u, theta, d) > match_power(cfg, u, atom.theta, atom.distance)))
        return out;
    return {theta, d, true};
}

inline cplx fit_gain(const ArrayConfig &cfg, const CVec &u, double a_norm2, double theta, double d)
{
    const CVec e = near_response(cfg, theta, d);
    return e.dot(u) / (a_norm2 * e.squaredNorm());
}
} // namespace detail

inline ObjectiveDerivatives objective_derivatives(const ArrayConfig &cfg, const CMat &R, const CVec &a, const AtomParam &atom)
{
    return detail::derivatives_from_u(cfg, detail::matched_row(R, a), a.squaredNorm(), atom);
}

/// E(g, j, theta, d) = ||R||^2 - ||R - g a_j e_n^T||^2.
inline double objective_E(const ArrayConfig &cfg, const CMat &R, const CVec &a, const AtomParam &atom)
{
    return objective_derivatives(cfg, R, a, atom).value;
}

/// One Newton update of (theta, d) with the gain held fixed. Rejected steps return the input.
inline NewtonOutcome newton_step(const ArrayConfig &cfg, const CMat &R, const CVec &a, const AtomParam &atom)
{
    return detail::newton_from_u(cfg, detail::matched_row(R, a), a.squaredNorm(), atom);
}

namespace detail
{
// Newton steps against the matched row u, re-fitting the scalar gain after every accepted step.
inline int refine_on_u(const ArrayConfig &cfg, const CVec &u, double a_norm2, AtomParam &atom, int steps)
{
    int accepted = 0;
    for (int s = 0; s < steps; ++s)
    {
        const NewtonOutcome step = newton_from_u(cfg, u, a_norm2, atom);
        if (!step.accepted)
            break;
        atom.theta = step.theta;
        atom.distance = step.distance;
        atom.gain = fit_gain(cfg, u, a_norm2, atom.theta, atom.distance);
        ++accepted;
    }
    return accepted;
}
} // namespace detail

/// Up to `steps` Newton updates against R, re-fitting the scalar gain after every accepted step.
/// Stops at the first rejected step. Returns the number of accepted steps.
inline int local_refine(const ArrayConfig &cfg, const CMat &R, const CVec &a, AtomParam &atom, int steps)
{
    return detail::refine_on_u(cfg, detail::matched_row(R, a), a.squaredNorm(), atom, steps);
}

inline CMat atom_columns(const ArrayConfig &cfg, const std::vector<AtomParam> &atoms)
{
    CMat cols(cfg.m_antennas, Eigen::Index(atoms.size()));
    for (std::size_t k = 0; k < atoms.size(); ++k)
        cols.col(Eigen::Index(k)) = near_response(cfg, atoms[k].theta, atoms[k].distance);
    return cols;
}

inline CMat atoms_residual(const ArrayConfig &cfg, const CMat &Y, const CMat &A, const std::vector<AtomParam> &atoms)
{
    CMat R = Y;
    for (const auto &at : atoms)
        R.noalias() -= (at.gain * A.col(at.row)) * near_response(cfg, at.theta, at.distance).transpose();
    return R;
}

/// Least-squares gains for fixed atom locations.
inline void refit_gains(const ArrayConfig &cfg, const CMat &Y, const CMat &A, std::vector<AtomParam> &atoms,
                        double ridge = 0.0)
{
    std::vector<int> rows;
    for (const auto &at : atoms)
        rows.push_back(at.row);
    const CVec g = ls_on_atoms(Y, A, rows, atom_columns(cfg, atoms), ridge);
    for (std::size_t k = 0; k < atoms.size(); ++k)
        atoms[k].gain = g(Eigen::Index(k));
}

namespace detail
{
// Refines atoms[first..] in order, each against Y minus all other atoms, with `steps` Newton steps.
inline void leave_one_out_pass(const ArrayConfig &cfg, const CMat &A, CMat &R, std::vector<AtomParam> &atoms,
                               std::size_t first, int steps)
{
    for (std::size_t k = first; k < atoms.size(); ++k)
    {
        AtomParam &at = atoms[k];
        const CVec a = A.col(at.row);
        const CVec old = at.gain * near_response(cfg, at.theta, at.distance);
        const CVec u = matched_row(R, a) + a.squaredNorm() * old;
        if (refine_on_u(cfg, u, a.squaredNorm(), at, steps) > 0)
            R.noalias() -= a * (at.gain * near_response(cfg, at.theta, at.distance) - old).transpose();
    }
}
} // namespace detail

/// T_c sweeps; each atom in order takes Newton steps against Y minus all other atoms, its scalar gain
/// re-fitted after each accepted step. All gains are re-fitted jointly by LS after the sweeps.
inline void cyclic_refine(const ArrayConfig &cfg, const CMat &Y, const CMat &A, std::vector<AtomParam> &atoms,
                          const RefineConfig &rc, double ridge = 0.0)
{
    rc.validate();
    if (atoms.empty())
        return;
    CMat R = atoms_residual(cfg, Y, A, atoms);
    for (int sweep = 0; sweep < rc.t_cyclic; ++sweep)
        detail::leave_one_out_pass(cfg, A, R, atoms, 0, rc.newton_steps);
    refit_gains(cfg, Y, A, atoms, ridge);
}

struct NTurboResult
{
    std::vector<AtomParam> atoms; // retained signal support R with refined parameters
    std::vector<int> row_support;
    std::map<int, CVec> rows; // spatial estimates z_j for j in the row support
    std::vector<int> active;
    CMat residual;
    int iterations = 0;
    StopReason stop = StopReason::max_iters;
    std::vector<double> residual_history;

    bool converged() const { return stop != StopReason::max_iters; }
};

namespace detail
{
inline AtomParam seed_atom(const Dictionary &dict, const ArrayConfig &cfg, int row, int col, cplx gain)
{
    const AtomLocation &loc = dict.locations[std::size_t(col)];
    AtomParam at;
    at.gain = gain;
    at.row = row;
    at.theta = clamp_theta(loc.theta);
    at.distance = std::isinf(loc.distance) ? kMaxDistance : clamp_distance(cfg, loc.distance);
    return at;
}

inline bool same_location(const AtomParam &a, const AtomParam &b, const Dictionary &dict)
{
    if (a.row != b.row)
        return false;
    if (!(std::abs(a.theta - b.theta) < dict.theta_step / 4.0))
        return false;
    if (dict.ring_step <= 0.0)
        return true;
    const double ra = (1.0 - a.theta * a.theta) / a.distance;
    const double rb = (1.0 - b.theta * b.theta) / b.distance;
    return std::abs(ra - rb) < dict.ring_step / 4.0;
}

// Appends the atoms of `fresh` that do not duplicate an atom already in `kept`.
inline void merge_atoms(std::vector<AtomParam> &kept, const std::vector<AtomParam> &fresh, const Dictionary &dict)
{
    for (const auto &f : fresh)
    {
        const bool dup = std::any_of(kept.begin(), kept.end(), [&](const AtomParam &k) { return same_location(k, f, dict); });
        if (!dup)
            kept.push_back(f);
    }
}

// Local refinement of the newly merged atoms against Y minus all other atoms.
inline void refine_new_atoms(const ArrayConfig &cfg, const CMat &Y, const CMat &A, std::vector<AtomParam> &atoms,
                             std::size_t first, int steps)
{
    if (steps <= 0 || first >= atoms.size())
        return;
    CMat R = atoms_residual(cfg, Y, A, atoms);
    leave_one_out_pass(cfg, A, R, atoms, first, steps);
}
} // namespace detail

/// Newtonized Turbo-CoSaMP: grid detection as in turbo_cosamp, then local and cyclic Newton refinement of
/// (theta, d) per atom, LS re-fit and screening over the continuous atom set.
inline NTurboResult n_turbo_cosamp(const CMat &Y, const CMat &A, const Dictionary &dict, const ArrayConfig &cfg,
                                   const RecoveryConfig &rcfg, const RefineConfig &refine)
{
    rcfg.validate();
    refine.validate();
    const CMat &B = dict.atoms;
    if (Y.rows() != A.rows() || Y.cols() != B.rows() || B.rows() != cfg.m_antennas)
        throw std::invalid_argument("n_turbo_cosamp: dimension mismatch between Y, A, B and the array.");

    const CMat B_conj = B.conjugate();
    NTurboResult out;
    out.residual = Y;
    double res_prev = Y.squaredNorm();
    out.residual_history.push_back(res_prev);
    if (res_prev <= rcfg.tau_sq)
        out.stop = StopReason::target_reached;

    for (int t = 1; t <= rcfg.max_iters && out.stop != StopReason::target_reached; ++t)
    {
        out.iterations = t;
        const CMat &R = out.residual;

        const CMat row_proxy = A.adjoint() * R;
        const auto s_rows = detail::select_rows(detail::row_energies(row_proxy), 2 * rcfg.k_a, nullptr);
        const auto k_rows = sorted_union(out.row_support, s_rows);
        CMat left(Eigen::Index(k_rows.size()), row_proxy.cols());
        for (std::size_t i = 0; i < k_rows.size(); ++i)
            left.row(Eigen::Index(i)) = row_proxy.row(k_rows[i]);
        const auto s_atoms = detail::select_entries(left * B_conj, k_rows, 2 * rcfg.r_sparsity);

        // new grid atoms join the current set; gains are fitted jointly before any refinement
        std::vector<AtomParam> fresh;
        for (const auto &[row, col] : s_atoms)
            fresh.push_back(detail::seed_atom(dict, cfg, row, col, cplx{0.0, 0.0}));
        std::vector<AtomParam> merged = out.atoms;
        const std::size_t n_old = merged.size();
        detail::merge_atoms(merged, fresh, dict);
        refit_gains(cfg, Y, A, merged, rcfg.ridge);
        detail::refine_new_atoms(cfg, Y, A, merged, n_old, refine.t_local * refine.newton_steps);

        std::vector<AtomParam> unique;
        detail::merge_atoms(unique, merged, dict);
        merged = std::move(unique);
        if (refine.t_cyclic > 0)
            cyclic_refine(cfg, Y, A, merged, refine, rcfg.ridge);
        else
            refit_gains(cfg, Y, A, merged, rcfg.ridge);

        // screening
        std::map<int, double> energy;
        for (int j : k_rows)
            energy[j] = 0.0;
        for (const auto &at : merged)
            energy[at.row] += std::norm(at.gain);
        RVec e(Eigen::Index(k_rows.size()));
        for (std::size_t i = 0; i < k_rows.size(); ++i)
            e(Eigen::Index(i)) = energy[k_rows[i]];
        std::vector<int> keep_rows;
        for (int i : detail::select_rows(e, rcfg.k_a, nullptr))
            keep_rows.push_back(k_rows[std::size_t(i)]);
        std::vector<double> mag(merged.size(), -1.0);
        for (std::size_t k = 0; k < merged.size(); ++k)
            if (std::binary_search(keep_rows.begin(), keep_rows.end(), merged[k].row))
                mag[k] = std::abs(merged[k].gain);
        std::vector<AtomParam> kept;
        auto order = top_k_indices(mag, std::size_t(rcfg.r_sparsity));
        std::sort(order.begin(), order.end());
        for (int k : order)
            if (mag[std::size_t(k)] >= 0.0)
                kept.push_back(merged[std::size_t(k)]);

        if (rcfg.debias && !kept.empty())
            refit_gains(cfg, Y, A, kept);
        CMat next = atoms_residual(cfg, Y, A, kept);
        const double res = next.squaredNorm();
        if (!(res < res_prev))
        {
            out.stop = StopReason::no_improvement;
            break;
        }
        out.atoms = std::move(kept);
        out.row_support = std::move(keep_rows);
        out.residual = std::move(next);
        res_prev = res;
        out.residual_history.push_back(res);
        if (res <= rcfg.tau_sq)
            out.stop = StopReason::target_reached;
    }

    std::map<int, double> row_energy;
    for (const auto &at : out.atoms)
    {
        row_energy[at.row] += std::norm(at.gain);
        auto [it, inserted] = out.rows.try_emplace(at.row, CVec::Zero(cfg.m_antennas));
        it->second += at.gain * near_response(cfg, at.theta, at.distance);
    }
    out.active = activity_decision(row_energy, out.row_support, rcfg.threshold);
    return out;
}

} // namespace nfura

#endif
