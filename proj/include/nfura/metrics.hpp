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

#ifndef NFURA_METRICS_HPP
#define NFURA_METRICS_HPP

#include "core.hpp"
#include "ura_codec.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>

namespace nfura
{

struct TrialScore
{
    double p_e = 0.0;
    double nmse = 0.0;               // aggregate over slots
    std::vector<double> slot_nmse;   // per slot
    double eb_n0_db = 0.0;
    double spectral_eff = 0.0;
    double iterations = 0.0;         // mean decoder iterations per slot
    int non_converged = 0;           // slots where the decoder hit its iteration cap
};

/// Misdetection rate over the K_a true messages plus the false-alarm fraction of the list.
/// An empty list contributes no false alarms.
inline double per_user_error(const std::vector<Bits> &decoded, const std::vector<Bits> &truth)
{
    if (truth.empty())
        throw std::invalid_argument("per_user_error: truth set is empty.");
    const std::set<Bits> L(decoded.begin(), decoded.end());
    const std::set<Bits> T(truth.begin(), truth.end());
    int missed = 0;
    for (const auto &m : truth)
        missed += L.count(m) ? 0 : 1;
    int bogus = 0;
    for (const auto &m : L)
        bogus += T.count(m) ? 0 : 1;
    const double md = double(missed) / double(truth.size());
    const double fa = L.empty() ? 0.0 : double(bogus) / double(L.size());
    return md + fa;
}

/// sum_{j in active} ||zhat_j - z_j||^2 / sum_{j in active} ||z_j||^2; nullopt when the denominator vanishes.
/// Rows absent from `estimate` count as zero.
inline std::optional<double> nmse(const std::map<int, CVec> &estimate, const std::map<int, CVec> &truth,
                                  const std::vector<int> &active)
{
    double num = 0.0, den = 0.0;
    for (int j : active)
    {
        auto t = truth.find(j);
        if (t == truth.end())
            throw std::invalid_argument("nmse: active row missing from the truth.");
        auto e = estimate.find(j);
        num += e == estimate.end() ? t->second.squaredNorm() : (e->second - t->second).squaredNorm();
        den += t->second.squaredNorm();
    }
    if (!(den > 0.0))
        return std::nullopt;
    return num / den;
}

/// Empirical distortion max |‖A X B^T‖_F^2 / ‖X‖_F^2 - 1| over random r-sparse X with CN(0,1) entries.
/// This only lower-bounds the restricted isometry constant of order r.
inline double rip_estimate(const CMat &A, const CMat &B, int r, int trials, Rng &rng)
{
    if (trials < 100)
        throw std::invalid_argument("rip_estimate: at least 100 trials are required.");
    const long long rows = A.cols(), cols = B.cols();
    const long long total = rows * cols;
    if (r < 1 || r > total)
        throw std::invalid_argument("rip_estimate: sparsity must lie in [1, 2^J * P].");
    double worst = 0.0;
    for (int t = 0; t < trials; ++t)
    {
        std::set<long long> pos;
        while (int(pos.size()) < r)
            pos.insert(rng.uniform_int(0, int(total - 1)));
        CMat Y = CMat::Zero(A.rows(), B.rows());
        double xn = 0.0;
        for (long long q : pos)
        {
            const cplx x = rng.complex_normal(1.0);
            xn += std::norm(x);
            Y.noalias() += (x * A.col(Eigen::Index(q / cols))) * B.col(Eigen::Index(q % cols)).transpose();
        }
        worst = std::max(worst, std::abs(Y.squaredNorm() / xn - 1.0));
    }
    return worst;
}

/// E_b/N_0 = S ||a_j||^2 / (B sigma^2), in dB.
inline double eb_n0_db(int s_slots, double codeword_energy, int b_bits, double noise_var)
{
    return linear_to_db(double(s_slots) * codeword_energy / (double(b_bits) * noise_var));
}

/// B K_a / (S N) bits per channel use.
inline double spectral_efficiency(int b_bits, int k_a, int s_slots, int n_block)
{
    return double(b_bits) * double(k_a) / (double(s_slots) * double(n_block));
}

} // namespace nfura

#endif
