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


#include "nfura/polar_dictionary.hpp"

#include <catch_amalgamated.hpp>

using namespace nfura;
using Catch::Approx;

TEST_CASE("proposed grid dimensions", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(128, 0.1);
    const Dictionary dict = build_polar(cfg, 0.5816);
    REQUIRE(dict.grid.has_value());
    CHECK(dict.grid->p_theta == 247);
    CHECK(dict.grid->p_phi == 3);
    CHECK(dict.rows() == 128);
    CHECK(dict.size() == 741);

    CHECK(detail::polar_p_theta(2, 0.01) == 2);
    CHECK_THROWS_AS(build_polar(ArrayConfig::make(2, 0.1), 0.01), std::invalid_argument);
    CHECK_THROWS_AS(build_polar(cfg, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_polar(cfg, 1.0), std::invalid_argument);
}

TEST_CASE("proposed grid follows the sampling formulas", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(64, 0.1);
    const double gamma = 0.5816;
    const PolarGrid g = make_polar_grid(cfg, gamma);
    const double dt = std::sqrt((1.0 - gamma) / 0.3917) / 64.0;
    const double dr = std::sqrt((1.0 - gamma) / 0.001624) / (64.0 * 64.0 * 0.1);
    CHECK(g.theta_step == Approx(dt).epsilon(1e-14));
    CHECK(g.ring_step == Approx(dr).epsilon(1e-14));
    const double ring_max = 4.0 * std::sqrt(2.0) / (64.0 * std::sqrt(64.0) * 0.1);
    for (int p = 0; p < g.p_theta; ++p)
    {
        CHECK(g.thetas[p] == Approx(-1.0 + (p + 0.5) * dt).margin(1e-14));
        CHECK(g.thetas[p] > -1.0);
        CHECK(g.thetas[p] < 1.0);
    }
    for (int q = 0; q < g.p_phi; ++q)
    {
        CHECK(g.ring_recips[q] > 0.0);
        CHECK(g.ring_recips[q] < ring_max);
        for (int p = 0; p < g.p_theta; ++p)
        {
            CHECK(g.distances(p, q) > 0.0);
            CHECK(g.distances(p, q) == Approx((1.0 - g.thetas[p] * g.thetas[p]) / g.ring_recips[q]).epsilon(1e-14));
        }
    }
}

TEST_CASE("proposed dictionary columns are grid responses", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(64, 0.1);
    const Dictionary dict = build_polar(cfg, 0.5816);
    const PolarGrid &g = *dict.grid;
    for (int q = 0; q < g.p_phi; ++q)
        for (int p = 0; p < g.p_theta; p += 7)
        {
            const int col = q * g.p_theta + p;
            CHECK(dict.column_of(p, q) == col);
            CHECK(dict.position_of(col) == std::pair<int, int>{p, q});
            CHECK((dict.atoms.col(col) - near_response(cfg, g.thetas[p], g.distances(p, q))).norm() < 1e-14);
            CHECK(dict.locations[col].theta == g.thetas[p]);
        }
    for (Eigen::Index c = 0; c < dict.size(); ++c)
        CHECK(std::abs(dict.atoms.col(c).norm() - 1.0) < 1e-12);
}

TEST_CASE("grid density is monotone in gamma", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(128, 0.1);
    PolarGrid prev = make_polar_grid(cfg, 0.2);
    for (double gamma : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9})
    {
        const PolarGrid g = make_polar_grid(cfg, gamma);
        CHECK(g.theta_step < prev.theta_step);
        CHECK(g.ring_step < prev.ring_step);
        CHECK(g.p_theta >= prev.p_theta);
        CHECK(g.p_phi >= prev.p_phi);
        prev = g;
    }
}

TEST_CASE("proposed dictionary is overcomplete when it exists", "[polar_dictionary]")
{
    int built = 0;
    for (int M : {8, 16, 32, 64, 128})
        for (double gamma : {0.1, 0.3, 0.5, 0.7, 0.9})
        {
            const ArrayConfig cfg = ArrayConfig::make(M, 0.1);
            if (detail::polar_p_phi(M, gamma) < 1)
            {
                CHECK_THROWS_AS(build_polar(cfg, gamma), std::invalid_argument);
                continue;
            }
            ++built;
            CHECK(build_polar(cfg, gamma).size() > M);
        }
    CHECK(built > 10);
}

TEST_CASE("angular DFT dictionary", "[polar_dictionary]")
{
    const Dictionary u2 = build_angular_dft(ArrayConfig::make(2, 0.1));
    CHECK((u2.atoms.col(0) - far_response(ArrayConfig::make(2, 0.1), -0.5)).norm() < 1e-15);
    CHECK((u2.atoms.col(1) - far_response(ArrayConfig::make(2, 0.1), 0.5)).norm() < 1e-15);

    for (int M : {2, 8, 33, 128})
    {
        const Dictionary u = build_angular_dft(ArrayConfig::make(M, 0.1));
        CHECK((u.atoms.adjoint() * u.atoms - CMat::Identity(M, M)).norm() < 1e-10);
    }
}

TEST_CASE("on-grid far channel is sparse in the DFT basis", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(128, 0.1);
    const Dictionary u = build_angular_dft(cfg);
    Rng rng(41);
    PathSet ps;
    for (int bin : {3, 60, 101})
        ps.paths.push_back({rng.complex_normal(1.0), u.locations[bin].theta, 50.0});
    const CVec coeff = u.atoms.adjoint() * synth_channel(cfg, ps, Field::far);
    int nonzero = 0;
    for (Eigen::Index i = 0; i < coeff.size(); ++i)
        if (std::abs(coeff(i)) > 1e-9)
            ++nonzero;
    CHECK(nonzero == 3);
}

TEST_CASE("beta dictionary dimensions", "[polar_dictionary]")
{
    const Dictionary a = build_polar_beta(ArrayConfig::make(128, 0.1), 1.2, 1.0);
    CHECK(a.n_rings == 6);
    CHECK(a.size() == 768);
    const Dictionary b = build_polar_beta(ArrayConfig::make(8, 0.1), 2.0, 1.0);
    CHECK(b.n_rings == 1);
    CHECK(b.size() == 8);
    for (Eigen::Index c = 0; c < a.size(); ++c)
        CHECK(std::abs(a.atoms.col(c).norm() - 1.0) < 1e-12);
    CHECK_THROWS_AS(build_polar_beta(ArrayConfig::make(8, 0.1), 3.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_polar_beta(ArrayConfig::make(8, 0.1), 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("adjacent coherence tracks gamma", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(128, 0.1);
    const Dictionary dict = build_polar(cfg, 0.5816);
    std::vector<double> adj;
    for (int q = 0; q < dict.n_rings; ++q)
        for (int p = 0; p + 1 < dict.n_angles; ++p)
            adj.push_back(std::abs(dict.atoms.col(dict.column_of(p, q)).dot(dict.atoms.col(dict.column_of(p + 1, q)))));
    std::nth_element(adj.begin(), adj.begin() + adj.size() / 2, adj.end());
    CHECK(std::abs(adj[adj.size() / 2] - 0.5816) < 0.05);

    const double proposed = max_adjacent_coherence(dict);
    const double beta = max_adjacent_coherence(build_polar_beta(cfg, 1.2, 1.0));
    CHECK(proposed < beta);

    Dictionary single;
    single.kind = DictionaryKind::polar_proposed;
    single.atoms = far_response(cfg, 0.1);
    single.n_angles = 1;
    single.n_rings = 1;
    CHECK(max_adjacent_coherence(single) == 0.0);
    CHECK_THROWS(max_adjacent_coherence(build_angular_dft(cfg)));
}

TEST_CASE("unitary extension of a one-angle grid", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(16, 0.1);
    PolarGrid g;
    g.p_theta = 1;
    g.p_phi = 1;
    g.thetas = {0.2};
    g.ring_recips = {0.1};
    g.distances = RMat::Constant(1, 1, 9.6);
    const CMat u = unitary_extension(cfg, g, 1);
    REQUIRE(u.rows() == 1);
    CHECK(std::abs(u(0, 0) - cplx(1.0, 0.0)) < 1e-15);
    CHECK_THROWS_AS(unitary_extension(cfg, g, 2), std::out_of_range);
}

TEST_CASE("unitary extension has unit-modulus scaled entries", "[polar_dictionary]")
{
    const ArrayConfig cfg = ArrayConfig::make(64, 0.1);
    const PolarGrid g = make_polar_grid(cfg, 0.5816);
    for (int ring = 1; ring <= g.p_phi; ++ring)
    {
        const CMat u = unitary_extension(cfg, g, ring);
        REQUIRE(u.rows() == g.p_theta);
        REQUIRE(u.cols() == g.p_theta);
        CHECK((u.cwiseAbs().array() - 1.0 / std::sqrt(double(g.p_theta))).abs().maxCoeff() < 1e-12);
    }
}
