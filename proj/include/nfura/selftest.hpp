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


#ifndef NFURA_SELFTEST_HPP
#define NFURA_SELFTEST_HPP

#include "harness.hpp"

#include <functional>

// Numbered acceptance checks shared by the CLI selftest and the acceptance test driver.
// Checks 1-8 are oracle comparisons, 9a-9e are Monte Carlo trend checks, 10 is sweep determinism.

namespace nfura::selftest
{

struct CheckResult
{
    std::string id;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct CheckOptions
{
    ScenarioConfig base;  // desk profile; trend checks override the swept fields only
    int threads = 1;
    int trend_seeds = 50; // seeds per trend point
    int paired_seeds = 100;
};

namespace detail
{
template <class F> CheckResult timed(std::string id, std::string title, F &&body)
{
    CheckResult r;
    r.id = std::move(id);
    r.title = std::move(title);
    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        body(r);
    }
    catch (const std::exception &e)
    {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

inline double median_of(std::vector<double> v)
{
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
    return nfura::detail::median(std::move(v));
}

inline std::vector<double> field_of(const std::vector<TrialRecord> &trials, double TrialScore::*field)
{
    std::vector<double> out;
    for (const auto &t : trials)
        if (!t.failed)
            out.push_back(t.score.*field);
    return out;
}

inline double mean_of(const std::vector<double> &v)
{
    return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

inline bool non_increasing(const std::vector<double> &v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[i - 1]))
            return false;
    return true;
}

inline std::string list(const std::vector<double> &v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? " " : "") + fmt(v[i]);
    return s + "]";
}

inline std::vector<int> plantable_columns(const Dictionary &dict, const ArrayConfig &arr)
{
    std::vector<int> out;
    for (int p = 0; p < int(dict.size()); ++p)
        if (dict.locations[std::size_t(p)].distance >= arr.fresnel_distance())
            out.push_back(p);
    return out;
}
} // namespace detail

inline CheckResult check_dictionary_dims()
{
    return detail::timed("1", "dictionary dimensions", [](CheckResult &r) {
        const ArrayConfig arr = ArrayConfig::make(128, 0.1);
        const Dictionary polar = build_polar(arr, 0.5816);
        const Dictionary beta = build_polar_beta(arr, 1.2, arr.fresnel_distance());
        const bool dims = polar.atoms.rows() == 128 && polar.atoms.cols() == 741 && polar.grid->p_theta == 247 &&
                          polar.grid->p_phi == 3 && beta.atoms.rows() == 128 && beta.atoms.cols() == 768;
        r.detail = "polar " + std::to_string(polar.atoms.rows()) + "x" + std::to_string(polar.atoms.cols()) + " (p_theta " +
                   std::to_string(polar.grid->p_theta) + ", p_phi " + std::to_string(polar.grid->p_phi) + "), beta " +
                   std::to_string(beta.atoms.rows()) + "x" + std::to_string(beta.atoms.cols());
        r.passed = dims;
    });
}

inline CheckResult check_unitary_extension()
{
    return detail::timed("2", "unitary extension Gram", [](CheckResult &r) {
        const ArrayConfig arr = ArrayConfig::from_carrier(64, 3e9);
        const PolarGrid grid = make_polar_grid(arr, 0.5816);
        double worst = 0.0;
        for (int q = 1; q <= grid.p_phi; ++q)
        {
            const CMat U = unitary_extension(arr, grid, q);
            const CMat G = U.adjoint() * U - CMat::Identity(U.cols(), U.cols());
            worst = std::max(worst, G.norm());
        }
        r.detail = "max ||U^H U - I||_F = " + detail::fmt(worst) + " over " + std::to_string(grid.p_phi) +
                   " rings (limit 1e-8)";
        r.passed = worst < 1e-8;
    });
}

inline CheckResult check_kronecker_proxy(std::uint64_t seed = 11, int instances = 200)
{
    return detail::timed("3", "Kronecker proxy equivalence", [=](CheckResult &r) {
        Rng rng(seed);
        double worst = 0.0;
        int selection_mismatch = 0;
        for (int i = 0; i < instances; ++i)
        {
            const int N = rng.uniform_int(1, 16), M = rng.uniform_int(1, 16), P = rng.uniform_int(1, 16);
            const int J = rng.uniform_int(1, 16);
            const CMat A = rng.complex_normal_matrix(N, J);
            const CMat B = rng.complex_normal_matrix(M, P);
            const CMat R = rng.complex_normal_matrix(N, M);
            std::vector<int> rows;
            for (int j = 0; j < J; ++j)
                if (rng.bit())
                    rows.push_back(j);
            if (rows.empty())
                rows.push_back(rng.uniform_int(0, J - 1));
            const int K = int(rows.size());
            CMat A_k(N, K);
            for (int k = 0; k < K; ++k)
                A_k.col(k) = A.col(rows[std::size_t(k)]);

            // (B kron A_K)^H vec(R), entry (k, p) at p K + k
            CMat kron(Eigen::Index(N) * M, Eigen::Index(K) * P);
            for (int p = 0; p < P; ++p)
                for (int m = 0; m < M; ++m)
                    kron.block(Eigen::Index(m) * N, Eigen::Index(p) * K, N, K) = B(m, p) * A_k;
            const CVec vec_r = Eigen::Map<const CVec>(R.data(), R.size());
            const CVec oracle = kron.adjoint() * vec_r;

            const CMat proxy = entry_proxy(A, rows, R, B);
            for (int p = 0; p < P; ++p)
                for (int k = 0; k < K; ++k)
                    worst = std::max(worst, std::abs(proxy(k, p) - oracle(Eigen::Index(p) * K + k)));

            const int rr = rng.uniform_int(1, std::max(1, K * P / 2));
            auto got = entry_proxy_select(A, rows, R, B, rr);
            std::vector<double> mag(std::size_t(K) * P);
            for (int k = 0; k < K; ++k)
                for (int p = 0; p < P; ++p)
                    mag[std::size_t(k) * P + std::size_t(p)] = std::abs(oracle(Eigen::Index(p) * K + k));
            std::vector<AtomIndex> want;
            for (int q : top_k_indices(mag, std::size_t(2 * rr)))
                want.emplace_back(rows[std::size_t(q / P)], q % P);
            std::sort(got.begin(), got.end());
            std::sort(want.begin(), want.end());
            selection_mismatch += got == want ? 0 : 1;
        }
        r.detail = "max |proxy - oracle| = " + detail::fmt(worst) + ", selection mismatches " +
                   std::to_string(selection_mismatch) + "/" + std::to_string(instances);
        r.passed = worst < 1e-9 && selection_mismatch == 0;
    });
}

inline CheckResult check_ls_stationarity(std::uint64_t seed = 12, int instances = 200)
{
    return detail::timed("4", "LS stationarity", [=](CheckResult &r) {
        Rng rng(seed);
        double worst = 0.0;
        for (int i = 0; i < instances; ++i)
        {
            const int N = rng.uniform_int(4, 16), M = rng.uniform_int(4, 16);
            const int J = rng.uniform_int(8, 64), P = rng.uniform_int(8, 48);
            const CMat A = rng.complex_normal_matrix(N, J);
            const CMat B = rng.complex_normal_matrix(M, P);
            const CMat Y = rng.complex_normal_matrix(N, M);
            const int K = rng.uniform_int(1, std::min(12, N * M / 2));
            std::vector<AtomIndex> support;
            while (int(support.size()) < K)
            {
                const AtomIndex a{rng.uniform_int(0, J - 1), rng.uniform_int(0, P - 1)};
                if (std::find(support.begin(), support.end(), a) == support.end())
                    support.push_back(a);
            }
            const CVec x = ls_on_support(Y, A, B, support);
            const auto [gram, n] = ls_normal_equations(Y, A, B, support);
            worst = std::max(worst, (gram.adjoint() * x - n).norm() / std::max(n.norm(), 1e-300));
        }
        r.detail = "max ||Lambda^H x - n|| / ||n|| = " + detail::fmt(worst) + " over " + std::to_string(instances) +
                   " supports (limit 1e-8)";
        r.passed = worst < 1e-8;
    });
}

inline CheckResult check_newton_derivatives(std::uint64_t seed = 13, int atoms = 100)
{
    return detail::timed("5", "Newton derivatives vs finite differences", [=](CheckResult &r) {
        Rng rng(seed);
        const ArrayConfig arr = ArrayConfig::from_carrier(64, 3e9);
        const int N = 16;
        double worst = 0.0;
        for (int i = 0; i < atoms; ++i)
        {
            const CVec a = rng.complex_normal_matrix(N, 1);
            AtomParam at;
            at.row = 0;
            at.gain = rng.complex_normal();
            at.theta = rng.uniform(-0.9, 0.9);
            at.distance = rng.uniform(arr.fresnel_distance(), 60.0);
            // residual holding a nearby atom plus noise
            const double th0 = std::clamp(at.theta + rng.uniform(-0.02, 0.02), -0.95, 0.95);
            const double d0 = at.distance * rng.uniform(0.8, 1.25);
            const CMat R = rng.complex_normal() * a * near_response(arr, th0, d0).transpose() +
                           rng.complex_normal_matrix(N, arr.m_antennas, 0.01);

            const ObjectiveDerivatives der = objective_derivatives(arr, R, a, at);
            const double h[2] = {1e-6, 1e-5 * at.distance};
            const auto shifted = [&](int axis, double s) {
                AtomParam p = at;
                (axis == 0 ? p.theta : p.distance) += s;
                return objective_derivatives(arr, R, a, p);
            };
            Eigen::Vector2d g_fd;
            Eigen::Matrix2d h_fd;
            for (int ax = 0; ax < 2; ++ax)
            {
                const ObjectiveDerivatives up = shifted(ax, h[ax]), dn = shifted(ax, -h[ax]);
                g_fd(ax) = (up.value - dn.value) / (2.0 * h[ax]);
                h_fd.col(ax) = (up.grad - dn.grad) / (2.0 * h[ax]);
            }
            // entrywise relative error, floored at 1e-6 of the largest entry of the same object
            const auto rel = [](double an, double fd, double floor) {
                return std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), floor});
            };
            const double gfloor = 1e-6 * der.grad.cwiseAbs().maxCoeff();
            const double hfloor = 1e-6 * der.hess.cwiseAbs().maxCoeff();
            for (int ax = 0; ax < 2; ++ax)
            {
                worst = std::max(worst, rel(der.grad(ax), g_fd(ax), gfloor));
                for (int bx = 0; bx < 2; ++bx)
                    worst = std::max(worst, rel(der.hess(ax, bx), h_fd(ax, bx), hfloor));
            }
        }
        r.detail = "max relative error " + detail::fmt(worst) + " over " + std::to_string(atoms) + " atoms (limit 1e-4)";
        r.passed = worst < 1e-4;
    });
}

inline CheckResult check_hungarian(std::uint64_t seed = 14, int instances = 1000)
{
    return detail::timed("6", "Hungarian vs brute force", [=](CheckResult &r) {
        Rng rng(seed);
        const int n = 7;
        int mismatch = 0;
        for (int i = 0; i < instances; ++i)
        {
            RMat C(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    C(a, b) = rng.uniform(0.0, 10.0);
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            double best = std::numeric_limits<double>::infinity();
            do
            {
                double c = 0.0;
                for (int a = 0; a < n; ++a)
                    c += C(a, perm[std::size_t(a)]);
                best = std::min(best, c);
            } while (std::next_permutation(perm.begin(), perm.end()));
            const Assignment as = hungarian(C);
            double c = 0.0;
            for (int a = 0; a < n; ++a)
                c += C(a, as.col_of_row[std::size_t(a)]);
            if (std::abs(c - best) > 1e-9 || std::abs(as.cost - best) > 1e-9)
                ++mismatch;
        }
        r.detail = std::to_string(mismatch) + " mismatches over " + std::to_string(instances) + " 7x7 matrices";
        r.passed = mismatch == 0;
    });
}

/// Residual error bound on planted desk-scale instances. A is column-normalised so the isometry estimate is
/// meaningful; the estimate uses the order |supp X_hat| + |supp X| of the error matrix.
inline CheckResult check_residual_bound(const ScenarioConfig &base, int instances = 200)
{
    return detail::timed("7", "residual error bound", [=](CheckResult &r) {
        ScenarioConfig cfg = base;
        cfg.validate();
        const ArrayConfig arr = cfg.array();
        const Dictionary dict = scenario_dictionary(cfg);
        const CMat &B = dict.atoms;
        const auto plantable = detail::plantable_columns(dict, arr);
        const double snr_db = cfg.snr_db.front();
        const double norm_a = std::sqrt(double(cfg.n_block));
        const double path_scale = std::sqrt(double(arr.m_antennas) / double(cfg.l_paths));

        int converged = 0, holds = 0, tried = 0;
        double eps_sum = 0.0;
        for (int i = 0; converged < instances && i < 4 * instances; ++i)
        {
            ++tried;
            Rng rng(mix_seed(cfg.base_seed + 7, std::uint64_t(i)));
            const Codebook cb = make_codebook(cfg.n_block, cfg.j_bits, rng);
            const CMat A = cb.matrix / norm_a;
            std::map<AtomIndex, cplx> x;
            for (int k = 0; k < cfg.k_a; ++k)
            {
                const int j = rng.uniform_int(0, cb.size() - 1);
                for (int l = 0; l < cfg.l_paths; ++l)
                {
                    const int p = plantable[std::size_t(rng.uniform_int(0, int(plantable.size()) - 1))];
                    x[{j, p}] += norm_a * path_scale * rng.complex_normal();
                }
            }
            CMat S = CMat::Zero(cfg.n_block, arr.m_antennas);
            std::vector<Coefficient> x_true;
            for (const auto &[idx, v] : x)
            {
                S.noalias() += (v * A.col(idx.first)) * B.col(idx.second).transpose();
                x_true.push_back({idx.first, idx.second, v});
            }
            const double noise_var = S.squaredNorm() / (db_to_linear(snr_db) * double(S.size()));
            const CMat Y = S + rng.complex_normal_matrix(S.rows(), S.cols(), noise_var);
            const RecoveryResult rec = turbo_cosamp(Y, A, B, recovery_config(cfg, Y, snr_db));
            if (!rec.converged())
                continue;
            ++converged;
            const int order = int(rec.state.signal_support.size() + x_true.size());
            const double eps = rip_estimate(A, B, order, 100, rng);
            eps_sum += eps;
            holds += residual_bound_check(x_true, rec.state.signal_support, rec.state.residual, std::sqrt(noise_var), eps).holds;
        }
        const double frac = converged ? double(holds) / converged : 0.0;
        r.detail = "bound holds on " + std::to_string(holds) + "/" + std::to_string(converged) + " converged runs (" +
                   std::to_string(tried) + " tried), mean eps " + detail::fmt(converged ? eps_sum / converged : 0.0) +
                   ", need >= 95%";
        r.passed = converged >= instances && frac >= 0.95;
    });
}

/// Noiseless on-grid frames at N = 32: exact detected set and NMSE < 1e-6 in every slot, P_e = 0 after clustering.
inline CheckResult check_exact_recovery(const ScenarioConfig &base, int seeds = 100)
{
    return detail::timed("8", "noiseless on-grid exact recovery", [=](CheckResult &r) {
        ScenarioConfig cfg = base;
        cfg.n_block = 32;
        cfg.on_grid = true;
        cfg.decoder = DecoderKind::turbo;
        cfg.stage = Stage::ura;
        cfg.validate();
        const ArrayConfig arr = cfg.array();
        const Dictionary dict = scenario_dictionary(cfg);
        const double snr = std::numeric_limits<double>::infinity();
        int exact_frames = 0, zero_pe = 0, exact_slots = 0;
        for (int i = 0; i < seeds; ++i)
        {
            Rng rng(mix_seed(cfg.base_seed + 8, std::uint64_t(i)));
            const Codebook cb = make_codebook(cfg.n_block, cfg.j_bits, rng);
            const MessageSet msgs =
                split_and_encode(random_messages(cfg.k_a, cfg.b_bits(), rng), cfg.s_slots, cfg.j_bits);
            const CMat H = draw_user_channels(cfg, arr, dict, rng);
            std::vector<SlotChannels> recovered;
            bool frame_exact = true;
            for (int s = 0; s < cfg.s_slots; ++s)
            {
                const SlotObservation obs = transmit_slot(cb, msgs, s, H, snr, rng);
                const SlotDecode dec = decode_slot(cfg, arr, cb.matrix, dict, obs.y, snr);
                std::map<int, CVec> truth;
                for (int k = 0; k < cfg.k_a; ++k)
                {
                    auto [it, inserted] = truth.try_emplace(obs.user_column[std::size_t(k)], CVec::Zero(arr.m_antennas));
                    it->second += H.row(k).transpose();
                }
                const double e = nmse(dec.rows, truth, obs.true_active).value_or(1.0);
                const bool ok = dec.active == obs.true_active && e < 1e-6;
                exact_slots += ok;
                frame_exact = frame_exact && ok;
                SlotChannels sc;
                sc.slot = s;
                for (int j : dec.active)
                {
                    auto it = dec.rows.find(j);
                    sc.channels.push_back(it == dec.rows.end() ? CVec::Zero(arr.m_antennas) : it->second);
                    sc.codewords.push_back(j);
                }
                recovered.push_back(std::move(sc));
            }
            ClusterConfig cc;
            cc.max_sweeps = cfg.max_sweeps;
            cc.collision_handling = cfg.collision_handling;
            const double pe = per_user_error(cluster_decode(recovered, cfg.j_bits, cc).messages, msgs.bits);
            exact_frames += frame_exact;
            zero_pe += pe == 0.0;
        }
        r.detail = "exact support + NMSE<1e-6 in " + std::to_string(exact_slots) + "/" +
                   std::to_string(seeds * cfg.s_slots) + " slots, " + std::to_string(exact_frames) + "/" +
                   std::to_string(seeds) + " frames; P_e = 0 in " + std::to_string(zero_pe) + "/" + std::to_string(seeds);
        r.passed = exact_frames == seeds && zero_pe == seeds;
    });
}

inline std::vector<TrialRecord> trials_at(ScenarioConfig cfg, int seeds, int threads)
{
    cfg.seeds = seeds;
    cfg.validate();
    return run_point(cfg, cfg.snr_db.front(), threads);
}

inline CheckResult check_trend_monotone(const CheckOptions &opt)
{
    return detail::timed("9a", "P_e and NMSE non-increasing in SNR and N", [&](CheckResult &r) {
        std::vector<double> pe_snr, nm_snr, pe_n, nm_n;
        for (double snr : {-5.0, 0.0, 5.0, 10.0})
        {
            ScenarioConfig cfg = opt.base;
            cfg.snr_db = {snr};
            const auto t = trials_at(cfg, opt.trend_seeds, opt.threads);
            pe_snr.push_back(detail::median_of(detail::field_of(t, &TrialScore::p_e)));
            nm_snr.push_back(detail::median_of(detail::field_of(t, &TrialScore::nmse)));
        }
        for (int n : {12, 16, 24, 32})
        {
            ScenarioConfig cfg = opt.base;
            cfg.snr_db = {10.0};
            cfg.n_block = n;
            const auto t = trials_at(cfg, opt.trend_seeds, opt.threads);
            pe_n.push_back(detail::median_of(detail::field_of(t, &TrialScore::p_e)));
            nm_n.push_back(detail::median_of(detail::field_of(t, &TrialScore::nmse)));
        }
        r.detail = "median P_e vs SNR " + detail::list(pe_snr) + ", NMSE vs SNR " + detail::list(nm_snr) +
                   "; P_e vs N " + detail::list(pe_n) + ", NMSE vs N " + detail::list(nm_n);
        r.passed = detail::non_increasing(pe_snr) && detail::non_increasing(nm_snr) && detail::non_increasing(pe_n) &&
                   detail::non_increasing(nm_n);
    });
}

inline CheckResult check_turbo_vs_somp(const CheckOptions &opt)
{
    return detail::timed("9b", "Turbo below K_a measurements vs S-OMP", [&](CheckResult &r) {
        ScenarioConfig cfg = opt.base;
        cfg.n_block = 16;
        cfg.snr_db = {10.0};
        cfg.decoder = DecoderKind::turbo;
        const double turbo = detail::mean_of(detail::field_of(trials_at(cfg, opt.trend_seeds, opt.threads), &TrialScore::p_e));
        cfg.decoder = DecoderKind::somp;
        const double somp = detail::mean_of(detail::field_of(trials_at(cfg, opt.trend_seeds, opt.threads), &TrialScore::p_e));
        r.detail = "N=16 K_a=" + std::to_string(cfg.k_a) + " 10 dB: P_e turbo " + detail::fmt(turbo) + " (need < 0.5), s_omp " +
                   detail::fmt(somp);
        r.passed = turbo < 0.5 && somp > turbo;
    });
}

inline CheckResult check_nturbo_vs_turbo(const CheckOptions &opt)
{
    return detail::timed("9c", "N-Turbo NMSE and iterations vs Turbo", [&](CheckResult &r) {
        ScenarioConfig cfg = opt.base;
        cfg.snr_db = {10.0};
        cfg.on_grid = false;
        cfg.decoder = DecoderKind::turbo;
        const auto t = trials_at(cfg, opt.paired_seeds, opt.threads);
        cfg.decoder = DecoderKind::nturbo;
        const auto n = trials_at(cfg, opt.paired_seeds, opt.threads);
        int better = 0, paired = 0;
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            if (t[i].failed || n[i].failed)
                continue;
            ++paired;
            better += n[i].score.nmse <= t[i].score.nmse;
        }
        const double it_t = detail::mean_of(detail::field_of(t, &TrialScore::iterations));
        const double it_n = detail::mean_of(detail::field_of(n, &TrialScore::iterations));
        r.detail = "NMSE(N-Turbo) <= NMSE(Turbo) on " + std::to_string(better) + "/" + std::to_string(paired) +
                   " seeds (need >= 80%), mean NMSE dB turbo " +
                   detail::fmt(linear_to_db(detail::mean_of(detail::field_of(t, &TrialScore::nmse)))) + " n-turbo " +
                   detail::fmt(linear_to_db(detail::mean_of(detail::field_of(n, &TrialScore::nmse)))) +
                   ", iterations turbo " + detail::fmt(it_t) + " n-turbo " + detail::fmt(it_n);
        r.passed = paired > 0 && better >= 0.8 * paired && it_n <= it_t;
    });
}

inline CheckResult check_polar_vs_dft(const CheckOptions &opt)
{
    return detail::timed("9d", "polar vs angular dictionary in the near field", [&](CheckResult &r) {
        std::vector<double> polar, dft;
        for (double snr : {-5.0, 0.0, 5.0, 10.0})
        {
            ScenarioConfig cfg = opt.base;
            cfg.snr_db = {snr};
            cfg.field = Field::near;
            cfg.dictionary = DictionaryKind::polar_proposed;
            polar.push_back(detail::mean_of(detail::field_of(trials_at(cfg, opt.trend_seeds, opt.threads), &TrialScore::p_e)));
            cfg.dictionary = DictionaryKind::angular_dft;
            dft.push_back(detail::mean_of(detail::field_of(trials_at(cfg, opt.trend_seeds, opt.threads), &TrialScore::p_e)));
        }
        bool ok = true;
        for (std::size_t i = 0; i < polar.size(); ++i)
            ok = ok && polar[i] < dft[i];
        r.detail = "mean P_e at SNR [-5 0 5 10]: polar " + detail::list(polar) + ", angular " + detail::list(dft);
        r.passed = ok;
    });
}

inline CheckResult check_collision_handling(const CheckOptions &opt)
{
    return detail::timed("9e", "collision handling on vs off", [&](CheckResult &r) {
        std::vector<double> on, off;
        for (int j : {8, 10, 12})
        {
            ScenarioConfig cfg = opt.base;
            cfg.j_bits = j;
            cfg.s_slots = 4;
            cfg.collision_handling = true;
            on.push_back(detail::mean_of(detail::field_of(trials_at(cfg, opt.trend_seeds, opt.threads), &TrialScore::p_e)));
            cfg.collision_handling = false;
            off.push_back(detail::mean_of(detail::field_of(trials_at(cfg, opt.trend_seeds, opt.threads), &TrialScore::p_e)));
        }
        bool ok = true;
        for (std::size_t i = 0; i < on.size(); ++i)
            ok = ok && on[i] <= off[i];
        r.detail = "mean P_e at J [8 10 12]: handled " + detail::list(on) + ", unhandled " + detail::list(off);
        r.passed = ok;
    });
}

inline std::string sweep_csv(const ScenarioConfig &cfg, SweepAxis axis, const std::vector<std::string> &values, int threads)
{
    std::ostringstream os;
    write_csv(os, sweep(cfg, axis, values, threads).rows);
    return os.str();
}

inline CheckResult check_determinism(const CheckOptions &opt)
{
    return detail::timed("10", "sweep determinism across thread counts", [&](CheckResult &r) {
        ScenarioConfig cfg = opt.base;
        cfg.seeds = 6;
        cfg.timing = false;
        const std::vector<std::string> values{"-5", "10"};
        const std::string one = sweep_csv(cfg, SweepAxis::snr, values, 1);
        const std::string again = sweep_csv(cfg, SweepAxis::snr, values, 1);
        const std::string many = sweep_csv(cfg, SweepAxis::snr, values, std::max(3, opt.threads));
        r.detail = std::string("repeat ") + (one == again ? "identical" : "differs") + ", multi-thread " +
                   (one == many ? "identical" : "differs") + " (" + std::to_string(one.size()) + " bytes)";
        r.passed = one == again && one == many;
    });
}

struct Check
{
    std::string id;
    std::function<CheckResult(const CheckOptions &)> run;
    bool fast = false;
};

inline std::vector<Check> all_checks()
{
    return {
        {"1", [](const CheckOptions &) { return check_dictionary_dims(); }, true},
        {"2", [](const CheckOptions &) { return check_unitary_extension(); }, true},
        {"3", [](const CheckOptions &) { return check_kronecker_proxy(); }, true},
        {"4", [](const CheckOptions &) { return check_ls_stationarity(); }, true},
        {"5", [](const CheckOptions &) { return check_newton_derivatives(); }, true},
        {"6", [](const CheckOptions &) { return check_hungarian(); }, true},
        {"7", [](const CheckOptions &o) { return check_residual_bound(o.base); }, false},
        {"8", [](const CheckOptions &o) { return check_exact_recovery(o.base); }, false},
        {"9a", check_trend_monotone, false},
        {"9b", check_turbo_vs_somp, false},
        {"9c", check_nturbo_vs_turbo, false},
        {"9d", check_polar_vs_dft, false},
        {"9e", check_collision_handling, false},
        {"10", check_determinism, false},
    };
}

inline std::string format(const CheckResult &r)
{
    std::ostringstream os;
    os << "criterion " << r.id << ": " << (r.passed ? "PASS" : "FAIL") << " - " << r.title << " - " << r.detail << " ["
       << std::fixed << std::setprecision(2) << r.seconds << " s]";
    return os.str();
}

} // namespace nfura::selftest

#endif
