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

#ifndef NFURA_ARRAY_GEOMETRY_HPP
#define NFURA_ARRAY_GEOMETRY_HPP

#include "core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

// Half-wavelength ULA responses under the plane-wave and spherical-wave models.
// Antennas are indexed m = 1..M with offset kappa_m = (2m - M - 1) / 2 from the array centre.

namespace nfura
{

// Fitted coefficients of the quadratic coherence model
//   Gamma ~ 1 - q1 M^2 dtheta^2 - q2 lambda^2 M^4 dring^2
inline constexpr double kCoherenceQ1 = 0.3917;
inline constexpr double kCoherenceQ2 = 0.001624;

inline constexpr double kSpeedOfLight = 299792458.0;

struct ArrayConfig
{
    int m_antennas = 64;
    double wavelength = 0.1; // meters

    static ArrayConfig make(int m_antennas, double wavelength)
    {
        ArrayConfig cfg{m_antennas, wavelength};
        cfg.validate();
        return cfg;
    }

    static ArrayConfig from_carrier(int m_antennas, double carrier_hz)
    {
        if (!(carrier_hz > 0.0))
            throw std::invalid_argument("Carrier frequency must be positive.");
        return make(m_antennas, kSpeedOfLight / carrier_hz);
    }

    // M = 1 is accepted as a degenerate single-element array.
    void validate() const
    {
        if (m_antennas < 1)
            throw std::invalid_argument("Antenna count must be at least 1.");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            throw std::invalid_argument("Wavelength must be positive and finite.");
    }

    double spacing() const { return wavelength / 2.0; }
    double aperture() const { return (m_antennas - 1) * wavelength / 2.0; }
    double rayleigh_distance() const { return 0.5 * double(m_antennas - 1) * double(m_antennas - 1) * wavelength; }
    double fresnel_distance() const
    {
        const double d = aperture();
        return 0.5 * std::sqrt(d * d * d / wavelength);
    }
    double kappa(int m) const { return (2.0 * m - m_antennas - 1.0) / 2.0; } // m is 1-based
};

struct Path
{
    cplx gain{1.0, 0.0};
    double doa = 0.0;      // sine of the angle of arrival, in (-1, 1)
    double distance = 1.0; // meters
};

struct PathSet
{
    std::vector<Path> paths;

    int l_paths() const { return static_cast<int>(paths.size()); }

    void validate() const
    {
        if (paths.empty())
            throw std::invalid_argument("PathSet needs at least one path.");
        for (const auto &p : paths)
        {
            if (!(p.doa > -1.0 && p.doa < 1.0))
                throw std::domain_error("Path DoA must lie in (-1, 1).");
            if (!(p.distance > 0.0))
                throw std::domain_error("Path distance must be positive.");
        }
    }
};

enum class Field
{
    near,
    far
};

using SpatialChannel = CVec;

namespace detail
{
inline void check_doa(double theta)
{
    if (!(theta > -1.0 && theta < 1.0))
        throw std::domain_error("DoA must lie in (-1, 1), got " + std::to_string(theta));
}

inline void check_distance(double d)
{
    if (!(d > 0.0))
        throw std::domain_error("Distance must be positive, got " + std::to_string(d));
}

// d - d_m evaluated without cancellation:
//   d - d_m = (d^2 - d_m^2) / (d + d_m) = (d theta kappa lambda - kappa^2 lambda^2 / 4) / (d + d_m)
inline double path_difference(double theta, double d, double kappa, double lambda)
{
    const double num = d * theta * kappa * lambda - kappa * kappa * lambda * lambda / 4.0;
    const double dm = std::sqrt(d * d - d * theta * kappa * lambda + kappa * kappa * lambda * lambda / 4.0);
    return num / (d + dm);
}
} // namespace detail

inline CVec far_response(const ArrayConfig &cfg, double theta)
{
    detail::check_doa(theta);
    const int M = cfg.m_antennas;
    const double scale = 1.0 / std::sqrt(double(M));
    CVec e(M);
    for (int m = 0; m < M; ++m)
        e(m) = scale * std::exp(kJ * (kPi * m * theta));
    return e;
}

inline CVec near_response(const ArrayConfig &cfg, double theta, double d)
{
    detail::check_doa(theta);
    detail::check_distance(d);
    const int M = cfg.m_antennas;
    const double k = 2.0 * kPi / cfg.wavelength;
    const double scale = 1.0 / std::sqrt(double(M));
    CVec e(M);
    for (int m = 1; m <= M; ++m)
        e(m - 1) = scale * std::exp(kJ * (k * detail::path_difference(theta, d, cfg.kappa(m), cfg.wavelength)));
    return e;
}

/// Near-field response with its first and second partial derivatives in (theta, d).
///
/// With psi_m = k (d - d_m), d_m = sqrt(s), s = d^2 - d theta kappa lambda + kappa^2 lambda^2 / 4:
///   s_theta = -d kappa lambda, s_d = 2d - theta kappa lambda, s_thth = 0, s_thd = -kappa lambda, s_dd = 2
///   (d_m)_x = s_x / (2 d_m),  (d_m)_xy = s_xy / (2 d_m) - s_x s_y / (4 d_m^3)
///   psi_theta = -k (d_m)_theta,  psi_d = k (1 - (d_m)_d),  psi_xy = -k (d_m)_xy
///   de/dx = j psi_x e,  d2e/dxdy = (j psi_xy - psi_x psi_y) e
struct ResponseJet
{
    CVec e, d_theta, d_dist, d_theta2, d_theta_dist, d_dist2;
};

inline ResponseJet near_response_jet(const ArrayConfig &cfg, double theta, double d)
{
    detail::check_doa(theta);
    detail::check_distance(d);
    const int M = cfg.m_antennas;
    const double lambda = cfg.wavelength;
    const double k = 2.0 * kPi / lambda;
    const double scale = 1.0 / std::sqrt(double(M));

    ResponseJet jet{CVec(M), CVec(M), CVec(M), CVec(M), CVec(M), CVec(M)};
    for (int m = 1; m <= M; ++m)
    {
        const double kap = cfg.kappa(m);
        const double s = d * d - d * theta * kap * lambda + kap * kap * lambda * lambda / 4.0;
        const double dm = std::sqrt(s);
        const double s_t = -d * kap * lambda;
        const double s_d = 2.0 * d - theta * kap * lambda;
        const double s_td = -kap * lambda;
        const double s_dd = 2.0;

        const double dm_t = s_t / (2.0 * dm);
        const double dm_d = s_d / (2.0 * dm);
        const double dm3 = 4.0 * dm * dm * dm;
        const double dm_tt = -s_t * s_t / dm3;
        const double dm_td = s_td / (2.0 * dm) - s_t * s_d / dm3;
        const double dm_dd = s_dd / (2.0 * dm) - s_d * s_d / dm3;

        const double psi = k * detail::path_difference(theta, d, kap, lambda);
        const double psi_t = -k * dm_t;
        const double psi_d = k * (1.0 - dm_d);
        const double psi_tt = -k * dm_tt;
        const double psi_td = -k * dm_td;
        const double psi_dd = -k * dm_dd;

        const cplx e = scale * std::exp(kJ * psi);
        const int i = m - 1;
        jet.e(i) = e;
        jet.d_theta(i) = kJ * psi_t * e;
        jet.d_dist(i) = kJ * psi_d * e;
        jet.d_theta2(i) = (kJ * psi_tt - psi_t * psi_t) * e;
        jet.d_theta_dist(i) = (kJ * psi_td - psi_t * psi_d) * e;
        jet.d_dist2(i) = (kJ * psi_dd - psi_d * psi_d) * e;
    }
    return jet;
}

inline SpatialChannel synth_channel(const ArrayConfig &cfg, const PathSet &paths, Field field)
{
    paths.validate();
    const int M = cfg.m_antennas;
    const double scale = std::sqrt(double(M) / double(paths.l_paths()));
    CVec h = CVec::Zero(M);
    for (const auto &p : paths.paths)
    {
        if (field == Field::near)
            h += p.gain * near_response(cfg, p.doa, p.distance);
        else
            h += p.gain * far_response(cfg, p.doa);
    }
    return scale * h;
}

/// |e_n(theta', d')^H e_n(theta, d)| from the exact spherical-wave responses.
inline double coherence(const ArrayConfig &cfg, double theta, double d, double theta2, double d2)
{
    const CVec a = near_response(cfg, theta, d);
    const CVec b = near_response(cfg, theta2, d2);
    // |b^H a| == |a^H b|; evaluate in a fixed order so the result is symmetric bit-for-bit.
    cplx acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < a.size(); ++i)
        acc += std::conj(b(i)) * a(i);
    return std::min(1.0, std::abs(acc));
}

inline double coherence_polynomial(const ArrayConfig &cfg, double d_theta, double d_ring)
{
    const double M = cfg.m_antennas;
    const double lam = cfg.wavelength;
    return 1.0 - kCoherenceQ1 * M * M * d_theta * d_theta - kCoherenceQ2 * lam * lam * M * M * M * M * d_ring * d_ring;
}

/// i.i.d. path draw: DoA uniform in (-1, 1), distance uniform in [d_min, d_max], gain CN(0, 1).
inline PathSet draw_paths(int l_paths, double d_min, double d_max, Rng &rng)
{
    PathSet ps;
    ps.paths.reserve(l_paths);
    for (int l = 0; l < l_paths; ++l)
    {
        Path p;
        p.gain = rng.complex_normal(1.0);
        do
            p.doa = rng.uniform(-1.0, 1.0);
        while (p.doa <= -1.0);
        p.distance = rng.uniform(d_min, d_max);
        ps.paths.push_back(p);
    }
    return ps;
}

} // namespace nfura

#endif
