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

#ifndef NFURA_POLAR_DICTIONARY_HPP
#define NFURA_POLAR_DICTIONARY_HPP

#include "array_geometry.hpp"

#include <limits>
#include <optional>
#include <sstream>
#include <string_view>

namespace nfura
{

enum class DictionaryKind
{
    polar_proposed,
    angular_dft,
    polar_beta
};

inline std::string_view to_string(DictionaryKind k)
{
    switch (k)
    {
    case DictionaryKind::polar_proposed:
        return "polar_proposed";
    case DictionaryKind::angular_dft:
        return "angular_dft";
    case DictionaryKind::polar_beta:
        return "polar_beta";
    }
    return "unknown";
}

inline DictionaryKind dictionary_kind_from_string(std::string_view s)
{
    if (s == "polar_proposed" || s == "polar")
        return DictionaryKind::polar_proposed;
    if (s == "angular_dft" || s == "dft")
        return DictionaryKind::angular_dft;
    if (s == "polar_beta" || s == "beta")
        return DictionaryKind::polar_beta;
    throw std::invalid_argument("Unknown dictionary kind: " + std::string(s));
}

/// Joint angle / distance-ring sampling controlled by the permissible coherence gamma.
struct PolarGrid
{
    double gamma = 0.0;
    int p_theta = 0;
    int p_phi = 0;
    std::vector<double> thetas;      // sampled DoAs
    std::vector<double> ring_recips; // sampled 1 / phi
    RMat distances;                  // p_theta x p_phi, (1 - theta^2) * phi
    double theta_step = 0.0;
    double ring_step = 0.0;
};

struct AtomLocation
{
    double theta = 0.0;
    double distance = std::numeric_limits<double>::infinity(); // +inf marks a plane-wave atom
};

/// Column-normalised dictionary plus the (theta, d) location of every column.
/// Polar kinds store columns ring-major: column = ring * n_angles + angle.
struct Dictionary
{
    CMat atoms;
    DictionaryKind kind = DictionaryKind::angular_dft;
    std::optional<PolarGrid> grid;
    std::vector<AtomLocation> locations;
    int n_angles = 0;
    int n_rings = 1;
    double theta_step = 0.0; // grid spacing in theta
    double ring_step = 0.0;  // grid spacing in 1/phi (0 for the DFT dictionary)

    Eigen::Index rows() const { return atoms.rows(); }
    Eigen::Index size() const { return atoms.cols(); }

    int column_of(int angle, int ring) const { return ring * n_angles + angle; }
    std::pair<int, int> position_of(int column) const { return {column % n_angles, column / n_angles}; }
};

namespace detail
{
inline int polar_p_theta(int M, double gamma) { return int(std::floor(2.0 * M * std::sqrt(kCoherenceQ1 / (1.0 - gamma)))); }
inline int polar_p_phi(int M, double gamma) { return int(std::floor(4.0 * std::sqrt(2.0 * M * kCoherenceQ2 / (1.0 - gamma)))); }
} // namespace detail

inline PolarGrid make_polar_grid(const ArrayConfig &cfg, double gamma)
{
    cfg.validate();
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("Coherence level gamma must lie in (0, 1).");
    const int M = cfg.m_antennas;
    const double lam = cfg.wavelength;

    PolarGrid g;
    g.gamma = gamma;
    g.p_theta = detail::polar_p_theta(M, gamma);
    g.p_phi = detail::polar_p_phi(M, gamma);
    if (g.p_phi < 1 || g.p_theta < 1)
    {
        // p_phi >= 1 needs 32 M q2 / (1 - gamma) >= 1
        const double gamma_min = 1.0 - 32.0 * M * kCoherenceQ2;
        std::ostringstream os;
        os << "Polar grid is empty for M=" << M << ", gamma=" << gamma << "; need gamma >= " << gamma_min;
        throw std::invalid_argument(os.str());
    }
    g.theta_step = std::sqrt((1.0 - gamma) / kCoherenceQ1) / M;
    g.ring_step = std::sqrt((1.0 - gamma) / kCoherenceQ2) / (double(M) * M * lam);

    g.thetas.resize(g.p_theta);
    for (int p = 1; p <= g.p_theta; ++p)
        g.thetas[p - 1] = -1.0 + (p - 0.5) * g.theta_step;
    g.ring_recips.resize(g.p_phi);
    for (int q = 1; q <= g.p_phi; ++q)
        g.ring_recips[q - 1] = (q - 0.5) * g.ring_step;

    g.distances.resize(g.p_theta, g.p_phi);
    for (int p = 0; p < g.p_theta; ++p)
        for (int q = 0; q < g.p_phi; ++q)
            g.distances(p, q) = (1.0 - g.thetas[p] * g.thetas[p]) / g.ring_recips[q];
    return g;
}

/// Proposed polar-domain dictionary B = [B_1 ... B_{P_phi}].
inline Dictionary build_polar(const ArrayConfig &cfg, double gamma)
{
    PolarGrid g = make_polar_grid(cfg, gamma);
    Dictionary dict;
    dict.kind = DictionaryKind::polar_proposed;
    dict.n_angles = g.p_theta;
    dict.n_rings = g.p_phi;
    dict.theta_step = g.theta_step;
    dict.ring_step = g.ring_step;
    dict.atoms.resize(cfg.m_antennas, Eigen::Index(g.p_theta) * g.p_phi);
    dict.locations.resize(std::size_t(g.p_theta) * g.p_phi);
    for (int q = 0; q < g.p_phi; ++q)
        for (int p = 0; p < g.p_theta; ++p)
        {
            const int col = dict.column_of(p, q);
            dict.atoms.col(col) = near_response(cfg, g.thetas[p], g.distances(p, q));
            dict.locations[col] = {g.thetas[p], g.distances(p, q)};
        }
    dict.grid = std::move(g);
    return dict;
}

/// Angular DFT matrix U; column m is the plane-wave response at (2(m-1) - M + 1) / M.
inline Dictionary build_angular_dft(const ArrayConfig &cfg)
{
    cfg.validate();
    const int M = cfg.m_antennas;
    Dictionary dict;
    dict.kind = DictionaryKind::angular_dft;
    dict.n_angles = M;
    dict.n_rings = 1;
    dict.theta_step = 2.0 / M;
    dict.atoms.resize(M, M);
    dict.locations.resize(M);
    for (int m = 1; m <= M; ++m)
    {
        const double theta = (2.0 * (m - 1) - M + 1) / M;
        dict.atoms.col(m - 1) = far_response(cfg, theta);
        dict.locations[m - 1] = {theta, std::numeric_limits<double>::infinity()};
    }
    return dict;
}

/// Comparison sampler with M uniform DoAs and Q = floor(sqrt(M/2) / beta) rings per angle.
///
/// This is a reconstruction: ring q of angle theta sits at d_q = (1 - theta^2) M^2 lambda / (8 beta^2 q),
/// uniform in 1/d, and ring 0 is the plane-wave response. rho_min is validated and kept as metadata;
/// the ring count is fixed by the formula above.
inline Dictionary build_polar_beta(const ArrayConfig &cfg, double beta, double rho_min)
{
    cfg.validate();
    if (!(beta > 0.0))
        throw std::invalid_argument("beta must be positive.");
    if (!(rho_min > 0.0))
        throw std::invalid_argument("rho_min must be positive.");
    const int M = cfg.m_antennas;
    const double lam = cfg.wavelength;
    const int Q = int(std::floor(std::sqrt(M / 2.0) / beta));
    if (Q < 1)
        throw std::invalid_argument("beta too large: no distance rings remain (floor(sqrt(M/2)/beta) = 0).");

    const double ring_scale = double(M) * M * lam / (8.0 * beta * beta);
    Dictionary dict;
    dict.kind = DictionaryKind::polar_beta;
    dict.n_angles = M;
    dict.n_rings = Q;
    dict.theta_step = 2.0 / M;
    dict.ring_step = 1.0 / ring_scale;
    dict.atoms.resize(M, Eigen::Index(M) * Q);
    dict.locations.resize(std::size_t(M) * Q);
    for (int q = 0; q < Q; ++q)
        for (int a = 0; a < M; ++a)
        {
            const double theta = (2.0 * a - M + 1) / M;
            const int col = dict.column_of(a, q);
            if (q == 0)
            {
                dict.atoms.col(col) = far_response(cfg, theta);
                dict.locations[col] = {theta, std::numeric_limits<double>::infinity()};
            }
            else
            {
                const double d = (1.0 - theta * theta) * ring_scale / q;
                dict.atoms.col(col) = near_response(cfg, theta, d);
                dict.locations[col] = {theta, d};
            }
        }
    return dict;
}

inline Dictionary build_dictionary(const ArrayConfig &cfg, DictionaryKind kind, double gamma, double beta)
{
    switch (kind)
    {
    case DictionaryKind::polar_proposed:
        return build_polar(cfg, gamma);
    case DictionaryKind::angular_dft:
        return build_angular_dft(cfg);
    case DictionaryKind::polar_beta:
        return build_polar_beta(cfg, beta, cfg.fresnel_distance());
    }
    throw std::invalid_argument("unknown dictionary kind");
}

/// Largest |b_i^H b_j| over grid neighbours (adjacent angle on one ring, adjacent ring at one angle).
inline double max_adjacent_coherence(const Dictionary &dict)
{
    if (dict.kind == DictionaryKind::angular_dft)
        throw std::invalid_argument("Adjacent coherence is defined for polar dictionaries only.");
    double best = 0.0;
    for (int q = 0; q < dict.n_rings; ++q)
        for (int a = 0; a < dict.n_angles; ++a)
        {
            const auto col = dict.atoms.col(dict.column_of(a, q));
            if (a + 1 < dict.n_angles)
                best = std::max(best, std::abs(col.dot(dict.atoms.col(dict.column_of(a + 1, q)))));
            if (q + 1 < dict.n_rings)
                best = std::max(best, std::abs(col.dot(dict.atoms.col(dict.column_of(a, q + 1)))));
        }
    return best;
}

/// Square P_theta x P_theta extension of ring `ring` (1-based) on a virtual P_theta-element array.
inline CMat unitary_extension(const ArrayConfig &cfg, const PolarGrid &grid, int ring)
{
    if (ring < 1 || ring > grid.p_phi)
        throw std::out_of_range("ring index must lie in [1, p_phi]");
    const int P = grid.p_theta;
    const double lam = cfg.wavelength;
    const double k = 2.0 * kPi / lam;
    const double scale = 1.0 / std::sqrt(double(P));
    CMat out(P, P);
    for (int p2 = 0; p2 < P; ++p2)
    {
        const double d = grid.distances(p2, ring - 1);
        const double theta = grid.thetas[p2];
        for (int p1 = 1; p1 <= P; ++p1)
        {
            const double kap = (2.0 * p1 - P - 1.0) / 2.0;
            out(p1 - 1, p2) = scale * std::exp(kJ * (k * detail::path_difference(theta, d, kap, lam)));
        }
    }
    return out;
}

} // namespace nfura

#endif
