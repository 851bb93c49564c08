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

#ifndef NFURA_URA_CODEC_HPP
#define NFURA_URA_CODEC_HPP

#include "core.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

// Codeword indices follow the 1-based convention index = dec(bits) + 1 inside MessageSet and demap().
// Decoders and the clustering stage work with 0-based codebook columns (column = index - 1).

namespace nfura
{

using Bits = std::vector<std::uint8_t>;

/// Partial DFT codebook: N distinct rows of the 2^J-point DFT, unit-modulus entries, so ||a_j|| = sqrt(N).
struct Codebook
{
    CMat matrix;
    int n_block = 0;
    int j_bits = 0;
    std::vector<int> dft_rows;

    int size() const { return int(matrix.cols()); }
};

inline Codebook make_codebook(int n_block, int j_bits, Rng &rng)
{
    if (j_bits < 1 || j_bits > 20)
        throw std::invalid_argument("J must lie in [1, 20].");
    const int K = 1 << j_bits;
    if (n_block < 1 || n_block > K)
        throw std::invalid_argument("N must lie in [1, 2^J].");

    std::vector<int> rows(K);
    std::iota(rows.begin(), rows.end(), 0);
    // partial Fisher-Yates: the first n_block entries are a uniform draw without replacement
    for (int i = 0; i < n_block; ++i)
        std::swap(rows[i], rows[rng.uniform_int(i, K - 1)]);
    rows.resize(n_block);
    std::sort(rows.begin(), rows.end());

    Codebook cb;
    cb.n_block = n_block;
    cb.j_bits = j_bits;
    cb.dft_rows = rows;
    cb.matrix.resize(n_block, K);
    for (int c = 0; c < K; ++c)
        for (int r = 0; r < n_block; ++r)
        {
            // reduce the phase index modulo K before scaling to keep the argument small
            const long long ph = (static_cast<long long>(rows[r]) * c) % K;
            cb.matrix(r, c) = std::exp(-kJ * (2.0 * kPi * double(ph) / K));
        }
    return cb;
}

/// MSB-first radix conversion of a bit segment.
inline int dec(std::span<const std::uint8_t> bits)
{
    int v = 0;
    for (auto b : bits)
        v = (v << 1) | (b ? 1 : 0);
    return v;
}

inline Bits demap(int index, int j_bits)
{
    if (j_bits < 1 || j_bits > 30)
        throw std::invalid_argument("J out of range.");
    if (index < 1 || index > (1 << j_bits))
        throw std::out_of_range("Codeword index must lie in [1, 2^J].");
    Bits out(j_bits);
    const int v = index - 1;
    for (int i = 0; i < j_bits; ++i)
        out[i] = std::uint8_t((v >> (j_bits - 1 - i)) & 1);
    return out;
}

struct MessageSet
{
    std::vector<Bits> bits;                // K_a messages of B = S J bits
    std::vector<std::vector<int>> segments; // K_a x S, 1-based codeword indices
    int s_slots = 0;
    int j_bits = 0;

    int k_a() const { return int(bits.size()); }
    int column(int user, int slot) const { return segments[user][slot] - 1; }
};

inline MessageSet split_and_encode(const std::vector<Bits> &bits, int s_slots, int j_bits)
{
    if (s_slots < 1 || j_bits < 1)
        throw std::invalid_argument("S and J must be positive.");
    MessageSet ms;
    ms.s_slots = s_slots;
    ms.j_bits = j_bits;
    ms.bits = bits;
    ms.segments.reserve(bits.size());
    for (const auto &m : bits)
    {
        if (int(m.size()) != s_slots * j_bits)
            throw std::invalid_argument("Message length must equal S * J.");
        std::vector<int> seg(s_slots);
        for (int s = 0; s < s_slots; ++s)
            seg[s] = dec(std::span<const std::uint8_t>(m.data() + std::size_t(s) * j_bits, j_bits)) + 1;
        ms.segments.push_back(std::move(seg));
    }
    return ms;
}

inline std::vector<Bits> random_messages(int k_a, int b_bits, Rng &rng)
{
    std::vector<Bits> out(k_a, Bits(b_bits));
    for (auto &m : out)
        for (auto &b : m)
            b = rng.bit() ? 1 : 0;
    return out;
}

struct SlotObservation
{
    CMat y;                       // N x M received block
    CMat signal;                  // A Xi H, kept for scoring
    CMat noise;                   // W
    std::vector<int> user_column; // codebook column chosen by each user
    std::vector<int> true_active; // distinct active columns, ascending
    double noise_var = 0.0;

    // Binary 2^J x K_a selection matrix Xi(s).
    Eigen::MatrixXi true_xi(int codebook_size) const
    {
        Eigen::MatrixXi xi = Eigen::MatrixXi::Zero(codebook_size, Eigen::Index(user_column.size()));
        for (std::size_t k = 0; k < user_column.size(); ++k)
            xi(user_column[k], Eigen::Index(k)) = 1;
        return xi;
    }
};

/// Received slot Y = sum_k a_{idx(k,s)} h_k^T + W.  H is K_a x M (rows are user channels).
/// Noise variance is set from the realised signal so that E||W||_F^2 = ||A Xi H||_F^2 / SNR.
/// snr_db = +inf disables the noise.
inline SlotObservation transmit_slot(const Codebook &cb, const MessageSet &msgs, int slot, const CMat &H, double snr_db,
                                     Rng &rng)
{
    if (slot < 0 || slot >= msgs.s_slots)
        throw std::out_of_range("slot index out of range");
    if (H.rows() != msgs.k_a())
        throw std::invalid_argument("H must have one row per active user.");
    const Eigen::Index N = cb.matrix.rows();
    const Eigen::Index M = H.cols();

    SlotObservation obs;
    obs.signal = CMat::Zero(N, M);
    obs.user_column.resize(msgs.k_a());
    for (int k = 0; k < msgs.k_a(); ++k)
    {
        const int col = msgs.column(k, slot);
        if (col < 0 || col >= cb.size())
            throw std::out_of_range("codeword index exceeds codebook size");
        obs.user_column[k] = col;
        obs.signal.noalias() += cb.matrix.col(col) * H.row(k);
    }
    obs.true_active = obs.user_column;
    std::sort(obs.true_active.begin(), obs.true_active.end());
    obs.true_active.erase(std::unique(obs.true_active.begin(), obs.true_active.end()), obs.true_active.end());

    if (std::isinf(snr_db) && snr_db > 0)
    {
        obs.noise = CMat::Zero(N, M);
        obs.noise_var = 0.0;
    }
    else
    {
        const double snr = db_to_linear(snr_db);
        obs.noise_var = obs.signal.squaredNorm() / (snr * double(N * M));
        obs.noise = rng.complex_normal_matrix(N, M, obs.noise_var);
    }
    obs.y = obs.signal + obs.noise;
    return obs;
}

/// Ground-truth dump: slot,user,codeword_index (1-based codeword index).
inline void write_ground_truth_csv(std::ostream &os, const MessageSet &msgs)
{
    os << "slot,user,codeword_index\n";
    for (int s = 0; s < msgs.s_slots; ++s)
        for (int k = 0; k < msgs.k_a(); ++k)
            os << s << ',' << k << ',' << msgs.segments[k][s] << '\n';
}

} // namespace nfura

#endif
