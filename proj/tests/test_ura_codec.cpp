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


#include "nfura/ura_codec.hpp"
#include "nfura/array_geometry.hpp"

#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>

using namespace nfura;

TEST_CASE("codebook rows are distinct DFT rows", "[ura_codec]")
{
    Rng rng(1);
    const Codebook cb = make_codebook(24, 8, rng);
    REQUIRE(cb.matrix.rows() == 24);
    REQUIRE(cb.size() == 256);
    CHECK(std::set<int>(cb.dft_rows.begin(), cb.dft_rows.end()).size() == 24);
    for (int c = 0; c < cb.size(); ++c)
        CHECK(std::abs(cb.matrix.col(c).norm() - std::sqrt(24.0)) < 1e-10);
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 256; c += 17)
        {
            const cplx want = std::exp(-kJ * (2.0 * kPi * cb.dft_rows[r] * c / 256.0));
            CHECK(std::abs(cb.matrix(r, c) - want) < 1e-12);
        }
    CHECK_THROWS_AS(make_codebook(257, 8, rng), std::invalid_argument);
    CHECK_THROWS_AS(make_codebook(0, 8, rng), std::invalid_argument);
}

TEST_CASE("full codebook is a scaled unitary matrix", "[ura_codec]")
{
    Rng rng(2);
    const Codebook cb = make_codebook(16, 4, rng);
    CHECK((cb.matrix.adjoint() * cb.matrix - 16.0 * CMat::Identity(16, 16)).norm() < 1e-10);
}

TEST_CASE("segment mapping is MSB first and 1-based", "[ura_codec]")
{
    const MessageSet zero = split_and_encode({Bits(6, 0)}, 2, 3);
    CHECK(zero.segments[0] == std::vector<int>{1, 1});
    const MessageSet two = split_and_encode({Bits{1, 0}}, 1, 2);
    CHECK(two.segments[0][0] == 3);
    CHECK(two.column(0, 0) == 2);

    const Bits m{0, 1, 1, 1, 0, 0};
    const MessageSet same = split_and_encode({m, m}, 2, 3);
    CHECK(same.segments[0] == same.segments[1]);
    CHECK(same.segments[0] == std::vector<int>{4, 5});

    CHECK_THROWS_AS(split_and_encode({Bits(5, 0)}, 2, 3), std::invalid_argument);
}

TEST_CASE("demap inverts dec", "[ura_codec]")
{
    CHECK(demap(1, 3) == Bits{0, 0, 0});
    CHECK(demap(8, 3) == Bits{1, 1, 1});
    for (int j = 1; j <= 12; ++j)
        for (int idx = 1; idx <= (1 << j); idx += std::max(1, (1 << j) / 64))
        {
            const Bits b = demap(idx, j);
            REQUIRE(int(b.size()) == j);
            CHECK(dec(b) + 1 == idx);
        }
    CHECK_THROWS_AS(demap(0, 3), std::out_of_range);
    CHECK_THROWS_AS(demap(9, 3), std::out_of_range);
}

TEST_CASE("split then demap recovers the message", "[ura_codec]")
{
    Rng rng(3);
    const auto msgs = random_messages(10, 4 * 9, rng);
    const MessageSet ms = split_and_encode(msgs, 4, 9);
    for (int k = 0; k < 10; ++k)
    {
        Bits joined;
        for (int s = 0; s < 4; ++s)
        {
            const Bits seg = demap(ms.segments[k][s], 9);
            joined.insert(joined.end(), seg.begin(), seg.end());
        }
        CHECK(joined == msgs[k]);
    }
}

namespace
{
CMat random_channels(int k_a, int M, Rng &rng)
{
    const ArrayConfig cfg = ArrayConfig::make(M, 0.1);
    CMat H(k_a, M);
    for (int k = 0; k < k_a; ++k)
        H.row(k) = synth_channel(cfg, draw_paths(2, 5.0, 20.0, rng), Field::near).transpose();
    return H;
}
} // namespace

TEST_CASE("noiseless slot equals the superposition", "[ura_codec]")
{
    Rng rng(4);
    const Codebook cb = make_codebook(16, 6, rng);
    const MessageSet ms = split_and_encode(random_messages(5, 12, rng), 2, 6);
    const CMat H = random_channels(5, 32, rng);
    const SlotObservation obs = transmit_slot(cb, ms, 1, H, std::numeric_limits<double>::infinity(), rng);
    CMat want = CMat::Zero(16, 32);
    for (int k = 0; k < 5; ++k)
        want += cb.matrix.col(ms.column(k, 1)) * H.row(k);
    CHECK((obs.y - want).norm() == 0.0);
    CHECK(obs.noise_var == 0.0);

    const Eigen::MatrixXi xi = obs.true_xi(cb.size());
    CHECK(xi.rows() == 64);
    CHECK(xi.cols() == 5);
    for (int k = 0; k < 5; ++k)
    {
        CHECK(xi.col(k).sum() == 1);
        CHECK(xi(ms.column(k, 1), k) == 1);
    }
    CHECK(std::is_sorted(obs.true_active.begin(), obs.true_active.end()));
}

TEST_CASE("single user noiseless slot is rank one", "[ura_codec]")
{
    Rng rng(5);
    const Codebook cb = make_codebook(12, 5, rng);
    const MessageSet ms = split_and_encode(random_messages(1, 5, rng), 1, 5);
    const CMat H = random_channels(1, 16, rng);
    const SlotObservation obs = transmit_slot(cb, ms, 0, H, std::numeric_limits<double>::infinity(), rng);
    const RVec sv = Eigen::JacobiSVD<CMat>(obs.y).singularValues();
    CHECK(sv(1) < 1e-10 * sv(0));
}

TEST_CASE("realised SNR matches the target", "[ura_codec]")
{
    Rng rng(6);
    const Codebook cb = make_codebook(100, 8, rng);
    const MessageSet ms = split_and_encode(random_messages(6, 8, rng), 1, 8);
    const CMat H = random_channels(6, 128, rng);
    for (double snr_db : {-5.0, 0.0, 10.0, 20.0})
    {
        const SlotObservation obs = transmit_slot(cb, ms, 0, H, snr_db, rng);
        const double realised = linear_to_db(obs.signal.squaredNorm() / obs.noise.squaredNorm());
        CHECK(std::abs(realised - snr_db) < 0.5);
    }
}

TEST_CASE("transmission is deterministic in the seed", "[ura_codec]")
{
    Rng setup(7);
    const Codebook cb = make_codebook(8, 4, setup);
    const MessageSet ms = split_and_encode(random_messages(3, 8, setup), 2, 4);
    const CMat H = random_channels(3, 8, setup);
    Rng a(99), b(99);
    CHECK(transmit_slot(cb, ms, 0, H, 5.0, a).y == transmit_slot(cb, ms, 0, H, 5.0, b).y);
    CHECK_THROWS_AS(transmit_slot(cb, ms, 2, H, 5.0, a), std::out_of_range);
    CHECK_THROWS_AS(transmit_slot(cb, ms, 0, H.topRows(2), 5.0, a), std::invalid_argument);
}

TEST_CASE("ground truth csv layout", "[ura_codec]")
{
    const MessageSet ms = split_and_encode({Bits{0, 1, 1, 0}, Bits{1, 1, 0, 0}}, 2, 2);
    std::ostringstream os;
    write_ground_truth_csv(os, ms);
    CHECK(os.str() == "slot,user,codeword_index\n0,0,2\n0,1,4\n1,0,3\n1,1,1\n");
}
