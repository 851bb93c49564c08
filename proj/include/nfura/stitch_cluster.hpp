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

#ifndef NFURA_STITCH_CLUSTER_HPP
#define NFURA_STITCH_CLUSTER_HPP

#include "core.hpp"
#include "ura_codec.hpp"

#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

// Slot stitching by modified K-medoids over recovered spatial channels.

namespace nfura
{

struct Assignment
{
    std::vector<int> col_of_row; // row i is assigned to column col_of_row[i]
    double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (shortest augmenting path with potentials, O(n^3)).
/// Negative entries are shifted by the minimum before solving; the reported cost uses the original matrix.
inline Assignment hungarian(const RMat &cost)
{
    if (cost.rows() != cost.cols())
        throw std::invalid_argument("hungarian: cost matrix must be square.");
    if (!cost.allFinite())
        throw std::invalid_argument("hungarian: cost matrix must be finite.");
    const int n = int(cost.rows());
    Assignment out;
    out.col_of_row.assign(std::size_t(n), -1);
    if (n == 0)
        return out;
    const double shift = std::min(0.0, cost.minCoeff());
    const auto c = [&](int i, int j) { return cost(i, j) - shift; };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(std::size_t(n) + 1, 0.0), v(std::size_t(n) + 1, 0.0);
    std::vector<int> p(std::size_t(n) + 1, 0), way(std::size_t(n) + 1, 0);
    for (int i = 1; i <= n; ++i)
    {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(std::size_t(n) + 1, inf);
        std::vector<char> used(std::size_t(n) + 1, 0);
        do
        {
            used[std::size_t(j0)] = 1;
            const int i0 = p[std::size_t(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j)
            {
                if (used[std::size_t(j)])
                    continue;
                const double cur = c(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
                if (cur < minv[std::size_t(j)])
                {
                    minv[std::size_t(j)] = cur;
                    way[std::size_t(j)] = j0;
                }
                if (minv[std::size_t(j)] < delta)
                {
                    delta = minv[std::size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j)
            {
                if (used[std::size_t(j)])
                {
                    u[std::size_t(p[std::size_t(j)])] += delta;
                    v[std::size_t(j)] -= delta;
                }
                else
                    minv[std::size_t(j)] -= delta;
            }
            j0 = j1;
        } while (p[std::size_t(j0)] != 0);
        do
        {
            const int j1 = way[std::size_t(j0)];
            p[std::size_t(j0)] = p[std::size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    for (int j = 1; j <= n; ++j)
        out.col_of_row[std::size_t(p[std::size_t(j)] - 1)] = j - 1;
    for (int i = 0; i < n; ++i)
        out.cost += cost(i, out.col_of_row[std::size_t(i)]);
    return out;
}

/// Recovered channels of one slot with their (0-based) codebook column indices.
struct SlotChannels
{
    int slot = 0;
    std::vector<CVec> channels;
    std::vector<int> codewords;

    int size() const { return int(channels.size()); }

    void validate() const
    {
        if (channels.size() != codewords.size())
            throw std::invalid_argument("SlotChannels: channels and codewords must have equal length.");
    }
};

struct ClusterConfig
{
    int max_sweeps = 20;
    bool collision_handling = true; // duplicate far channels when K_s < K_hat
    int k_hat = 0;                  // 0: K_hat = max_s K_s
};

/// members[k][s] is the index of the channel of slot s in cluster k, or -1 when the slot left it empty.
struct ClusterState
{
    int k_hat = 0;
    std::vector<CVec> medoids;
    std::vector<std::pair<int, int>> medoid_member; // (slot, index) of each medoid
    std::vector<std::vector<int>> members;
    std::vector<int> dropped_per_slot; // channels discarded because K_s > K_hat
};

namespace detail
{
inline RMat distance_matrix(const std::vector<CVec> &channels, const std::vector<CVec> &medoids)
{
    RMat C(Eigen::Index(channels.size()), Eigen::Index(medoids.size()));
    for (std::size_t i = 0; i < channels.size(); ++i)
        for (std::size_t k = 0; k < medoids.size(); ++k)
            C(Eigen::Index(i), Eigen::Index(k)) = (channels[i] - medoids[k]).norm();
    return C;
}

inline std::vector<double> min_distances(const RMat &C)
{
    std::vector<double> out(std::size_t(C.rows()));
    for (Eigen::Index i = 0; i < C.rows(); ++i)
        out[std::size_t(i)] = C.cols() ? C.row(i).minCoeff() : 0.0;
    return out;
}
} // namespace detail

/// Index (into `vectors`) of the element minimising the summed Euclidean distance to the others.
/// Ties go to the earliest position, so callers pass members ordered by (slot, index).
inline int update_medoid(const std::vector<CVec> &vectors)
{
    if (vectors.empty())
        throw std::invalid_argument("update_medoid: empty cluster.");
    int best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < vectors.size(); ++a)
    {
        double s = 0.0;
        for (std::size_t b = 0; b < vectors.size(); ++b)
            if (a != b)
                s += (vectors[a] - vectors[b]).norm();
        if (s < best_sum)
        {
            best_sum = s;
            best = int(a);
        }
    }
    return best;
}

/// Initial state: K_hat medoids taken from the channels of `seed` (extra clusters stay empty-centred at zero).
inline ClusterState init_clusters(const std::vector<SlotChannels> &slots, int seed, int k_hat)
{
    ClusterState st;
    st.k_hat = k_hat;
    st.members.assign(std::size_t(k_hat), std::vector<int>(slots.size(), -1));
    st.dropped_per_slot.assign(slots.size(), 0);
    const auto &s0 = slots[std::size_t(seed)];
    for (int k = 0; k < k_hat; ++k)
    {
        if (k < s0.size())
        {
            st.medoids.push_back(s0.channels[std::size_t(k)]);
            st.medoid_member.emplace_back(seed, k);
            st.members[std::size_t(k)][std::size_t(seed)] = k;
        }
        else
        {
            st.medoids.push_back(CVec::Zero(s0.channels.empty() ? 0 : s0.channels.front().size()));
            st.medoid_member.emplace_back(-1, -1);
        }
    }
    return st;
}

/// Balanced assignment of one slot's channels to the current medoids; replaces that slot's members.
inline void assign_slot(ClusterState &st, const SlotChannels &slot_data, int slot, bool collision_handling = true)
{
    slot_data.validate();
    const int K = st.k_hat;
    const int Ks = slot_data.size();
    for (auto &m : st.members)
        m[std::size_t(slot)] = -1;
    st.dropped_per_slot[std::size_t(slot)] = 0;
    if (K == 0 || Ks == 0)
        return;

    const RMat C = detail::distance_matrix(slot_data.channels, st.medoids);
    const auto dmin = detail::min_distances(C);

    // rows of the squared-up problem, each labelled with its channel index (-1: dummy)
    std::vector<int> row_channel;
    if (Ks >= K)
    {
        std::vector<double> closeness(dmin.size());
        for (std::size_t i = 0; i < dmin.size(); ++i)
            closeness[i] = -dmin[i];
        auto keep = top_k_indices(closeness, std::size_t(K)); // drop the channels farthest from every medoid
        std::sort(keep.begin(), keep.end());
        row_channel = keep;
        st.dropped_per_slot[std::size_t(slot)] = Ks - K;
    }
    else
    {
        for (int i = 0; i < Ks; ++i)
            row_channel.push_back(i);
        const int extra = K - Ks;
        if (collision_handling)
        {
            const auto far = top_k_indices(dmin, std::size_t(Ks));
            for (int e = 0; e < extra; ++e)
                row_channel.push_back(far[std::size_t(e % Ks)]);
        }
        else
            row_channel.insert(row_channel.end(), std::size_t(extra), -1);
    }

    RMat sq(K, K);
    for (int r = 0; r < K; ++r)
        for (int k = 0; k < K; ++k)
            sq(r, k) = row_channel[std::size_t(r)] < 0 ? 0.0 : C(row_channel[std::size_t(r)], k);
    const Assignment asg = hungarian(sq);
    for (int r = 0; r < K; ++r)
        st.members[std::size_t(asg.col_of_row[std::size_t(r)])][std::size_t(slot)] = row_channel[std::size_t(r)];
}

/// Medoid refresh for every non-empty cluster.
inline void update_medoids(ClusterState &st, const std::vector<SlotChannels> &slots)
{
    for (int k = 0; k < st.k_hat; ++k)
    {
        std::vector<CVec> vecs;
        std::vector<std::pair<int, int>> ids;
        for (std::size_t s = 0; s < slots.size(); ++s)
        {
            const int i = st.members[std::size_t(k)][s];
            if (i >= 0)
            {
                vecs.push_back(slots[s].channels[std::size_t(i)]);
                ids.emplace_back(int(s), i);
            }
        }
        if (vecs.empty())
            continue;
        const int best = update_medoid(vecs);
        st.medoids[std::size_t(k)] = vecs[std::size_t(best)];
        st.medoid_member[std::size_t(k)] = ids[std::size_t(best)];
    }
}

struct ClusterResult
{
    std::vector<Bits> messages; // distinct decoded messages, sorted
    ClusterState state;
    int sweeps = 0;
    bool cycled = false;  // stopped on a repeated (non-consecutive) assignment
    bool capped = false;  // hit the sweep cap
    int dropped = 0;      // total channels discarded by the K_s > K_hat rule
    int incomplete = 0;   // clusters missing at least one slot
};

inline ClusterResult cluster_decode(const std::vector<SlotChannels> &slots, int j_bits, const ClusterConfig &cfg = {})
{
    if (slots.size() < 2)
        throw std::invalid_argument("cluster_decode: at least two slots are required.");
    if (cfg.max_sweeps < 1 || cfg.k_hat < 0)
        throw std::invalid_argument("cluster_decode: invalid configuration.");
    for (const auto &s : slots)
        s.validate();

    int seed = 0;
    for (std::size_t s = 1; s < slots.size(); ++s)
        if (slots[s].size() > slots[std::size_t(seed)].size())
            seed = int(s);
    const int k_hat = cfg.k_hat > 0 ? cfg.k_hat : slots[std::size_t(seed)].size();

    ClusterResult out;
    out.state = init_clusters(slots, seed, k_hat);
    if (k_hat == 0)
        return out;

    std::set<std::vector<std::vector<int>>> seen;
    seen.insert(out.state.members);
    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep)
    {
        const auto before = out.state.members;
        for (std::size_t s = 0; s < slots.size(); ++s)
        {
            assign_slot(out.state, slots[s], int(s), cfg.collision_handling);
            update_medoids(out.state, slots);
        }
        out.sweeps = sweep;
        if (out.state.members == before)
            break;
        if (!seen.insert(out.state.members).second)
        {
            out.cycled = true;
            break;
        }
        if (sweep == cfg.max_sweeps)
            out.capped = true;
    }

    std::set<Bits> list;
    for (int k = 0; k < k_hat; ++k)
    {
        Bits msg;
        bool complete = true;
        for (std::size_t s = 0; s < slots.size() && complete; ++s)
        {
            const int i = out.state.members[std::size_t(k)][s];
            if (i < 0)
            {
                complete = false;
                break;
            }
            const Bits seg = demap(slots[s].codewords[std::size_t(i)] + 1, j_bits);
            msg.insert(msg.end(), seg.begin(), seg.end());
        }
        if (complete)
            list.insert(std::move(msg));
        else
            ++out.incomplete;
    }
    out.messages.assign(list.begin(), list.end());
    for (int d : out.state.dropped_per_slot)
        out.dropped += d;
    return out;
}

/// cluster,slot,codeword_index,distance_to_medoid (codeword index 1-based).
inline void write_cluster_csv(std::ostream &os, const ClusterState &st, const std::vector<SlotChannels> &slots)
{
    os << "cluster,slot,codeword_index,distance_to_medoid\n";
    for (int k = 0; k < st.k_hat; ++k)
        for (std::size_t s = 0; s < slots.size(); ++s)
        {
            const int i = st.members[std::size_t(k)][s];
            if (i < 0)
                continue;
            const double dist = (slots[s].channels[std::size_t(i)] - st.medoids[std::size_t(k)]).norm();
            os << k << ',' << s << ',' << slots[s].codewords[std::size_t(i)] + 1 << ',' << dist << '\n';
        }
}

} // namespace nfura

#endif
