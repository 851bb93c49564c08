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


#include "nfura/offgrid_refine.hpp"
#include "nfura/ura_codec.hpp"

#include <catch_amalgamated.hpp>

using namespace nfura;

namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Setup
{
    ArrayConfig arr;
    Codebook cb;
    Dictionary dict;
};

Setup make_setup(int M, int n_block, std::uint64_t seed)
{
    Rng rng(seed);
    const ArrayConfig arr = ArrayConfig::make(M, 0.1);
    return {arr, make_codebook(n_block, 6, rng), build_polar(arr, 0.5816)};
}

CMat single_atom(const Setup &s, int row, cplx g, double theta, double d)
{
    return g * s.cb.matrix.col(row) * near_response(s.arr, theta, d).transpose();
}

CMat with_noise(const CMat &S, double snr_db, Rng &rng)
{
    return S + rng.complex_normal_matrix(S.rows(), S.cols(), S.squaredNorm() / (db_to_linear(snr_db) * double(S.size())));
}

double ring_of(double theta, double d) { return (1.0 - theta * theta) / d; }
} // namespace

TEST_CASE("objective equals the residual power reduction", "[offgrid_refine]")
{
    const Setup s = make_setup(32, 16, 1);
    Rng rng(2);
    for (int t = 0; t < 50; ++t)
    {
        const CMat R = rng.complex_normal_matrix(16, 32);
        AtomParam at{rng.complex_normal(), rng.uniform_int(0, 63), rng.uniform(-0.9, 0.9), rng.uniform(5.0, 30.0)};
        const CVec a = s.cb.matrix.col(at.row);
        const CMat moved = R - at.gain * a * near_response(s.arr, at.theta, at.distance).transpose();
        const double want = R.squaredNorm() - moved.squaredNorm();
        CHECK(objective_E(s.arr, R, a, at) == Catch::Approx(want).epsilon(1e-10).margin(1e-9));
        at.gain = 0.0;
        CHECK(objective_E(s.arr, R, a, at) == 0.0);
    }
}

TEST_CASE("objective peaks at the planted atom", "[offgrid_refine]")
{
    const Setup s = make_setup(64, 16, 3);
    const double theta = 0.23, d = 14.0;
    const cplx g(0.8, -0.4);
    const CMat R = single_atom(s, 9, g, theta, d);
    const CVec a = s.cb.matrix.col(9);
    const double peak = objective_E(s.arr, R, a, {g, 9, theta, d});
    for (int i = -3; i <= 3; ++i)
        for (int k = -3; k <= 3; ++k)
        {
            if (i == 0 && k == 0)
                continue;
            const double th = theta + i * 2e-3;
            const double dd = (1.0 - th * th) / (ring_of(theta, d) + k * 2e-3);
            CHECK(objective_E(s.arr, R, a, {g, 9, th, dd}) < peak);
        }
}

TEST_CASE("analytic derivatives match finite differences", "[offgrid_refine]")
{
    const Setup s = make_setup(64, 16, 4);
    Rng rng(5);
    for (int t = 0; t < 30; ++t)
    {
        AtomParam at{rng.complex_normal(), 0, rng.uniform(-0.9, 0.9), rng.uniform(s.arr.fresnel_distance(), 60.0)};
        const CVec a = s.cb.matrix.col(rng.uniform_int(0, 63));
        const CMat R = rng.complex_normal() * a *
                           near_response(s.arr, std::clamp(at.theta + rng.uniform(-0.02, 0.02), -0.95, 0.95),
                                         at.distance * rng.uniform(0.8, 1.25))
                               .transpose() +
                       rng.complex_normal_matrix(16, 64, 0.01);
        const ObjectiveDerivatives der = objective_derivatives(s.arr, R, a, at);
        const double h[2] = {1e-6, 1e-5 * at.distance};
        for (int ax = 0; ax < 2; ++ax)
        {
            AtomParam up = at, dn = at;
            (ax == 0 ? up.theta : up.distance) += h[ax];
            (ax == 0 ? dn.theta : dn.distance) -= h[ax];
            const ObjectiveDerivatives du = objective_derivatives(s.arr, R, a, up);
            const ObjectiveDerivatives dd = objective_derivatives(s.arr, R, a, dn);
            const double g_fd = (du.value - dd.value) / (2.0 * h[ax]);
            const Eigen::Vector2d h_fd = (du.grad - dd.grad) / (2.0 * h[ax]);
            const double gfloor = 1e-6 * der.grad.cwiseAbs().maxCoeff();
            const double hfloor = 1e-6 * der.hess.cwiseAbs().maxCoeff();
            CHECK(std::abs(der.grad(ax) - g_fd) <= 1e-4 * std::max({std::abs(g_fd), gfloor}));
            for (int bx = 0; bx < 2; ++bx)
                CHECK(std::abs(der.hess(bx, ax) - h_fd(bx)) <= 1e-4 * std::max({std::abs(h_fd(bx)), hfloor}));
        }
    }
}

TEST_CASE("seed at the truth is stationary", "[offgrid_refine]")
{
    const Setup s = make_setup(64, 16, 6);
    const cplx g(1.1, 0.3);
    const CMat R = single_atom(s, 5, g, -0.41, 17.0);
    const CVec a = s.cb.matrix.col(5);
    const AtomParam at{g, 5, -0.41, 17.0};
    const ObjectiveDerivatives der = objective_derivatives(s.arr, R, a, at);
    CHECK(std::abs(der.grad(0)) < 1e-8);
    CHECK(std::abs(der.grad(1)) < 1e-8);
    const NewtonOutcome step = newton_step(s.arr, R, a, at);
    CHECK(std::abs(step.theta - at.theta) < 1e-6);
    CHECK(std::abs(step.distance - at.distance) < 1e-6);
}

namespace
{
struct HalfCellRun
{
    int moved = 0;    // seeds with at least one accepted step
    int improved = 0; // moved seeds whose theta and d errors both shrank
    int within = 0;   // seeds inside |dtheta| < 1e-4 and |dd| / d < 1e-3
};

HalfCellRun half_cell_run(int steps, double snr_db)
{
    const Setup s = make_setup(64, 16, 7);
    Rng rng(8);
    HalfCellRun run;
    for (int t = 0; t < 100; ++t)
    {
        const int row = rng.uniform_int(0, 63);
        const double theta = rng.uniform(-0.8, 0.8);
        const double d = rng.uniform(10.0, 20.0);
        CMat Y = single_atom(s, row, std::polar(1.0, rng.uniform(-kPi, kPi)), theta, d);
        if (std::isfinite(snr_db))
            Y = with_noise(Y, snr_db, rng);
        const CVec a = s.cb.matrix.col(row);
        AtomParam at;
        at.row = row;
        at.theta = theta + s.dict.theta_step / 2.0;
        at.distance = std::max(s.arr.fresnel_distance(),
                               (1.0 - at.theta * at.theta) / (ring_of(theta, d) + s.dict.ring_step / 2.0));
        at.gain = detail::fit_gain(s.arr, detail::matched_row(Y, a), a.squaredNorm(), at.theta, at.distance);
        const double e_theta = std::abs(at.theta - theta), e_dist = std::abs(at.distance - d);
        if (local_refine(s.arr, Y, a, at, steps) > 0)
        {
            ++run.moved;
            run.improved += std::abs(at.theta - theta) < e_theta && std::abs(at.distance - d) < e_dist;
        }
        run.within += std::abs(at.theta - theta) < 1e-4 && std::abs(at.distance - d) / d < 1e-3;
    }
    return run;
}
} // namespace

TEST_CASE("Newton steps from half a grid cell move toward the truth", "[offgrid_refine]")
{
    const HalfCellRun run = half_cell_run(3, 20.0);
    CHECK(run.moved >= 80);
    CHECK(run.improved == run.moved);
}

TEST_CASE("Newton refinement converges without noise", "[offgrid_refine]")
{
    const HalfCellRun run = half_cell_run(40, kInf);
    CHECK(run.moved >= 80);
    CHECK(run.within == run.moved);
}

TEST_CASE("rejected Newton steps leave the atom unchanged", "[offgrid_refine]")
{
    const Setup s = make_setup(32, 16, 9);
    Rng rng(10);
    int rejected = 0;
    for (int t = 0; t < 200; ++t)
    {
        const CMat R = rng.complex_normal_matrix(16, 32);
        const CVec a = s.cb.matrix.col(3);
        AtomParam at{rng.complex_normal(), 3, rng.uniform(-0.9, 0.9), rng.uniform(5.0, 40.0)};
        const NewtonOutcome step = newton_step(s.arr, R, a, at);
        const CVec u = detail::matched_row(R, a);
        if (!step.accepted)
        {
            ++rejected;
            CHECK(step.theta == at.theta);
            CHECK(step.distance == at.distance);
        }
        else
        {
            CHECK(detail::match_power(s.arr, u, step.theta, step.distance) >
                  detail::match_power(s.arr, u, at.theta, at.distance));
            CHECK(step.distance >= s.arr.fresnel_distance());
            CHECK(std::abs(step.theta) < 1.0);
        }
    }
    CHECK(rejected > 0);
}

TEST_CASE("cyclic refinement of one atom agrees with local refinement", "[offgrid_refine]")
{
    const Setup s = make_setup(64, 16, 11);
    Rng rng(12);
    for (int t = 0; t < 10; ++t)
    {
        const int row = rng.uniform_int(0, 63);
        const double theta = rng.uniform(-0.7, 0.7), d = rng.uniform(10.0, 20.0);
        const CMat Y = single_atom(s, row, std::polar(1.0, rng.uniform(-kPi, kPi)), theta, d);
        const CVec a = s.cb.matrix.col(row);
        AtomParam seed;
        seed.row = row;
        seed.theta = theta + s.dict.theta_step / 4.0;
        seed.distance = (1.0 - seed.theta * seed.theta) / (ring_of(theta, d) + s.dict.ring_step / 4.0);
        seed.gain = detail::fit_gain(s.arr, detail::matched_row(Y, a), a.squaredNorm(), seed.theta, seed.distance);

        AtomParam local = seed;
        local_refine(s.arr, Y, a, local, 10);
        std::vector<AtomParam> cyc{seed};
        cyclic_refine(s.arr, Y, s.cb.matrix, cyc, RefineConfig{0, 10, 1});
        CHECK(std::abs(local.theta - cyc[0].theta) < 1e-8);
        CHECK(std::abs(local.distance - cyc[0].distance) < 1e-6 * d);
        CHECK(std::abs(local.gain - cyc[0].gain) < 1e-6);
    }
}

TEST_CASE("cyclic refinement of two planted atoms", "[offgrid_refine]")
{
    const Setup s = make_setup(64, 16, 13);
    Rng rng(14);
    const auto energy = [&](const std::vector<AtomParam> &atoms)
    {
        double e = 0.0;
        for (const auto &at : atoms)
            e += std::norm(at.gain) * s.cb.matrix.col(at.row).squaredNorm();
        return e;
    };
    int ok = 0;
    for (int t = 0; t < 20; ++t)
    {
        const int r0 = rng.uniform_int(0, 31), r1 = rng.uniform_int(32, 63);
        const double t0 = rng.uniform(-0.8, -0.1), t1 = rng.uniform(0.1, 0.8);
        const double d0 = rng.uniform(10.0, 20.0), d1 = rng.uniform(10.0, 20.0);
        const CMat Y = single_atom(s, r0, 1.0, t0, d0) + single_atom(s, r1, cplx(0.0, 1.0), t1, d1);
        std::vector<AtomParam> atoms;
        for (auto [row, th, d] : {std::tuple{r0, t0, d0}, std::tuple{r1, t1, d1}})
        {
            AtomParam at;
            at.row = row;
            at.theta = th + s.dict.theta_step / 2.0;
            at.distance = std::max(s.arr.fresnel_distance(),
                                   (1.0 - at.theta * at.theta) / (ring_of(th, d) + s.dict.ring_step / 2.0));
            atoms.push_back(at);
        }
        refit_gains(s.arr, Y, s.cb.matrix, atoms);
        const double res_before = atoms_residual(s.arr, Y, s.cb.matrix, atoms).squaredNorm();
        const double energy_before = energy(atoms);
        cyclic_refine(s.arr, Y, s.cb.matrix, atoms, RefineConfig{0, 40, 1});
        CHECK(atoms_residual(s.arr, Y, s.cb.matrix, atoms).squaredNorm() <= res_before);
        CHECK(energy(atoms) >= energy_before);
        ok += std::abs(atoms[0].theta - t0) < 1e-4 && std::abs(atoms[0].distance - d0) / d0 < 1e-3 &&
              std::abs(atoms[1].theta - t1) < 1e-4 && std::abs(atoms[1].distance - d1) / d1 < 1e-3;
    }
    CHECK(ok >= 12);
}

TEST_CASE("duplicate atoms are merged", "[offgrid_refine]")
{
    const Setup s = make_setup(64, 16, 15);
    const AtomParam a{1.0, 4, 0.2, 15.0};
    AtomParam near = a;
    near.theta += s.dict.theta_step / 10.0;
    AtomParam other_row = a;
    other_row.row = 5;
    AtomParam far = a;
    far.theta += s.dict.theta_step;
    CHECK(detail::same_location(a, near, s.dict));
    CHECK_FALSE(detail::same_location(a, other_row, s.dict));
    CHECK_FALSE(detail::same_location(a, far, s.dict));
    std::vector<AtomParam> kept{a};
    detail::merge_atoms(kept, {near, other_row, far}, s.dict);
    CHECK(kept.size() == 3);
}

TEST_CASE("N-Turbo on on-grid instances", "[offgrid_refine]")
{
    const Setup s = make_setup(32, 16, 16);
    Rng rng(17);
    std::vector<int> plantable;
    for (int c = 0; c < int(s.dict.size()); ++c)
        if (s.dict.locations[std::size_t(c)].distance >= s.arr.fresnel_distance())
            plantable.push_back(c);
    int exact = 0;
    for (int t = 0; t < 20; ++t)
    {
        std::vector<Coefficient> x;
        while (x.size() < 2)
        {
            const int j = rng.uniform_int(0, 63);
            const int p = plantable[std::size_t(rng.uniform_int(0, int(plantable.size()) - 1))];
            if (x.empty() || x[0].row != j)
                x.push_back({j, p, std::polar(rng.uniform(0.5, 1.5), rng.uniform(-kPi, kPi))});
        }
        std::sort(x.begin(), x.end());
        const CMat Y = -residual_of(CMat::Zero(16, 32), s.cb.matrix, spatial_rows(x, s.dict.atoms));

        RecoveryConfig rc;
        rc.k_a = 2;
        rc.r_sparsity = 2;
        rc.tau_sq = default_tau_sq(Y, kInf);
        const RecoveryResult turbo = turbo_cosamp(Y, s.cb.matrix, s.dict.atoms, rc);
        const NTurboResult nt = n_turbo_cosamp(Y, s.cb.matrix, s.dict, s.arr, rc, RefineConfig{});
        CHECK(nt.row_support == turbo.state.row_support);
        for (std::size_t i = 1; i < nt.residual_history.size(); ++i)
            CHECK(nt.residual_history[i] < nt.residual_history[i - 1]);
        for (const auto &at : nt.atoms)
        {
            CHECK(std::abs(at.theta) < 1.0);
            CHECK(at.distance >= s.arr.fresnel_distance());
        }
        CHECK((atoms_residual(s.arr, Y, s.cb.matrix, nt.atoms) - nt.residual).norm() < 1e-9 * Y.norm());
        exact += nt.residual.squaredNorm() < 1e-12 * Y.squaredNorm();
    }
    CHECK(exact >= 10);
}
