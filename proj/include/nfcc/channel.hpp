// SPDX-License-Identifier: Apache-2.0
//
// nfcc: near-field channel charting and pilot allocation for XL-MIMO
// Copyright (C) 2026 The nfcc authors
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

#ifndef NFCC_CHANNEL_HPP
#define NFCC_CHANNEL_HPP

#include "scenario.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfcc
{

// Offset of element n from the array centre, in units of the element spacing.
inline double element_offset(std::size_t n, std::size_t M)
{
    return static_cast<double>(n) - (static_cast<double>(M) - 1.0) / 2.0;
}

// Spherical-wave array response b(theta, rho), unit norm.
//   b_n = exp(-j k (r_n - rho)) / sqrt(M),  r_n = sqrt(rho^2 - 2 rho theta x_n + x_n^2),
// with x_n the element offset in metres and k = 2 pi / lambda.
inline CVector near_field_steering(double theta, double rho, const ArrayGeometry &array)
{
    if (!(rho > 0.0))
        throw std::domain_error("near_field_steering: distance must be positive, got " + std::to_string(rho));
    if (!(std::abs(theta) <= 1.0))
        throw std::domain_error("near_field_steering: |theta| must not exceed 1, got " + std::to_string(theta));

    const std::size_t M = array.num_antennas;
    const double k = 2.0 * pi / array.wavelength_m;
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    CVector b(static_cast<Eigen::Index>(M));
    for (std::size_t n = 0; n < M; ++n)
    {
        const double x = element_offset(n, M) * array.spacing_m;
        const double r = std::sqrt(rho * rho - 2.0 * rho * theta * x + x * x);
        // r - rho without cancellation at large rho
        const double excess = (x * x - 2.0 * rho * theta * x) / (r + rho);
        b[static_cast<Eigen::Index>(n)] = std::polar(scale, -k * excess);
    }
    return b;
}

// Planar-wave array response, the rho -> infinity limit of near_field_steering.
inline CVector far_field_steering(double theta, const ArrayGeometry &array)
{
    const std::size_t M = array.num_antennas;
    const double k = 2.0 * pi / array.wavelength_m;
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    CVector b(static_cast<Eigen::Index>(M));
    for (std::size_t n = 0; n < M; ++n)
        b[static_cast<Eigen::Index>(n)] = std::polar(scale, k * theta * element_offset(n, M) * array.spacing_m);
    return b;
}

// M x L matrix of the path steering vectors of one UT.
inline CMatrix path_steering_matrix(const std::vector<PathParams> &paths, const ArrayGeometry &array)
{
    CMatrix B(static_cast<Eigen::Index>(array.num_antennas), static_cast<Eigen::Index>(paths.size()));
    for (std::size_t l = 0; l < paths.size(); ++l)
        B.col(static_cast<Eigen::Index>(l)) = near_field_steering(paths[l].theta, paths[l].distance_m, array);
    return B;
}

// h = sqrt(xi / L) * sum_l g_l b(theta_l, rho_l), using the gains stored in `paths`.
inline CVector channel_from_paths(const std::vector<PathParams> &paths, double xi, const ArrayGeometry &array)
{
    if (paths.empty())
        throw std::domain_error("channel_from_paths: no paths");
    CVector h = CVector::Zero(static_cast<Eigen::Index>(array.num_antennas));
    for (const auto &p : paths)
        h += p.gain * near_field_steering(p.theta, p.distance_m, array);
    return std::sqrt(xi / static_cast<double>(paths.size())) * h;
}

struct ChannelSet
{
    std::vector<CMatrix> draws;       // per UT, M x N, one channel realization per column
    std::vector<CMatrix> covariances; // per UT, M x M
    std::vector<double> large_scale_gain;

    std::size_t num_uts() const { return draws.size(); }
    std::size_t num_antennas() const { return draws.empty() ? 0 : static_cast<std::size_t>(draws.front().rows()); }
};

// (1/N) sum_n h_n h_n^H, symmetrized to remove round-off asymmetry.
inline CMatrix sample_covariance(const CMatrix &draws)
{
    if (draws.cols() == 0)
        throw std::domain_error("sample_covariance: zero channel draws");
    const CMatrix phi = (draws * draws.adjoint()) / static_cast<double>(draws.cols());
    return (phi + phi.adjoint()) / 2.0;
}

inline std::vector<CMatrix> sample_covariance(const ChannelSet &channels)
{
    std::vector<CMatrix> out;
    out.reserve(channels.num_uts());
    for (std::size_t k = 0; k < channels.num_uts(); ++k)
    {
        if (channels.draws[k].cols() == 0)
            throw std::domain_error("sample_covariance: UT " + std::to_string(k) + " has no draws");
        out.push_back(sample_covariance(channels.draws[k]));
    }
    return out;
}

// Draws num_covariance_draws realizations per UT with the path geometry held fixed and
// fresh CN(0,1) path gains per draw, then attaches the sample covariances.
// Each UT uses its own sub-stream derived from one value taken from `rng`.
inline ChannelSet synthesize_channels(const UtGeometry &geom, const ScenarioConfig &config, Rng &rng)
{
    config.validate();
    const auto array = config.array();
    const std::size_t K = geom.num_uts();
    const auto N = static_cast<Eigen::Index>(config.num_covariance_draws);
    const std::uint64_t base = rng();

    ChannelSet set;
    set.draws.resize(K);
    set.large_scale_gain = geom.large_scale_gain;
    for (std::size_t k = 0; k < K; ++k)
    {
        const auto &paths = geom.paths[k];
        if (paths.empty())
            throw std::domain_error("synthesize_channels: UT " + std::to_string(k) + " has no paths");
        const CMatrix B = path_steering_matrix(paths, array);
        Rng ut_rng(derive_seed(base, {k}));
        CMatrix gains(B.cols(), N);
        for (Eigen::Index n = 0; n < N; ++n)
            for (Eigen::Index l = 0; l < B.cols(); ++l)
                gains(l, n) = complex_gaussian(ut_rng);
        set.draws[k] = std::sqrt(geom.large_scale_gain[k] / static_cast<double>(paths.size())) * (B * gains);
    }
    set.covariances = sample_covariance(set);
    return set;
}

} // namespace nfcc

#endif
