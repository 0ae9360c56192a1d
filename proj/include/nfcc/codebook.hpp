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

#ifndef NFCC_CODEBOOK_HPP
#define NFCC_CODEBOOK_HPP

#include "channel.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace nfcc
{

struct PolarAtom
{
    std::size_t angle_index = 0; // m in [0, M)
    std::size_t ring = 1;        // s in [1, S]
    double theta = 0.0;
    double distance_m = 0.0;
};

// Near-field dictionary W = [W_1, ..., W_S], W_s holding the M angles at distance ring s.
struct PolarCodebook
{
    CMatrix atoms; // M x (M S)
    std::vector<PolarAtom> grid;
    std::size_t num_angles = 0;
    std::size_t num_rings = 0;
    double beta_delta = 0.0;

    std::size_t column(std::size_t m, std::size_t s) const { return (s - 1) * num_angles + m; }
    std::size_t size() const { return grid.size(); }
};

// theta_m = (2m - M + 1) / M
inline double polar_angle(std::size_t m, std::size_t M)
{
    return (2.0 * static_cast<double>(m) - static_cast<double>(M) + 1.0) / static_cast<double>(M);
}

// rho_s(theta) = M^2 d^2 (1 - theta^2) / (2 s lambda beta)
inline double ring_distance(double theta, std::size_t s, const ArrayGeometry &array, double beta_delta)
{
    const double M = static_cast<double>(array.num_antennas);
    return M * M * array.spacing_m * array.spacing_m * (1.0 - theta * theta) /
           (2.0 * static_cast<double>(s) * array.wavelength_m * beta_delta);
}

inline PolarCodebook build_polar_codebook(const ArrayGeometry &array, std::size_t num_rings, double beta_delta)
{
    if (num_rings < 1 || array.num_antennas < 1 || !(beta_delta > 0.0))
        throw std::invalid_argument("build_polar_codebook: need S >= 1, M >= 1 and beta_delta > 0");
    const std::size_t M = array.num_antennas;
    PolarCodebook cb;
    cb.num_angles = M;
    cb.num_rings = num_rings;
    cb.beta_delta = beta_delta;
    cb.atoms.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M * num_rings));
    cb.grid.resize(M * num_rings);
    for (std::size_t s = 1; s <= num_rings; ++s)
        for (std::size_t m = 0; m < M; ++m)
        {
            const double theta = polar_angle(m, M);
            const double rho = ring_distance(theta, s, array, beta_delta);
            if (!(rho > 0.0))
                throw std::logic_error("build_polar_codebook: non-positive ring distance");
            const std::size_t c = cb.column(m, s);
            cb.grid[c] = {m, s, theta, rho};
            cb.atoms.col(static_cast<Eigen::Index>(c)) = near_field_steering(theta, rho, array);
        }
    return cb;
}

inline PolarCodebook build_polar_codebook(const ScenarioConfig &config)
{
    config.validate();
    return build_polar_codebook(config.array(), config.num_distance_samples, config.beta_delta);
}

// Unitary M x M DFT matrix whose column m is the half-wavelength planar steering
// vector at theta_m.
inline CMatrix build_dft_codebook(std::size_t M)
{
    if (M < 1)
        throw std::invalid_argument("build_dft_codebook: M must be >= 1");
    const ArrayGeometry half_wave{M, 0.5, 1.0};
    CMatrix D(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    for (std::size_t m = 0; m < M; ++m)
        D.col(static_cast<Eigen::Index>(m)) = far_field_steering(polar_angle(m, M), half_wave);
    return D;
}

struct CoherenceStats
{
    double max = 0.0;
    double mean = 0.0;
    std::size_t pairs = 0;
    bool exhaustive = true;
};

// max and mean of |w_i^H w_j| over distinct column pairs. Codebooks wider than
// `max_columns` are evaluated on a seeded random subset of columns.
inline CoherenceStats codebook_coherence(const PolarCodebook &cb, std::size_t max_columns = 768,
                                         std::uint64_t seed = 0)
{
    const std::size_t n = cb.size();
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    CoherenceStats st;
    if (n > max_columns)
    {
        std::vector<std::size_t> picked;
        Rng rng(seed);
        std::sample(cols.begin(), cols.end(), std::back_inserter(picked), max_columns, rng);
        cols = std::move(picked);
        st.exhaustive = false;
    }
    if (cols.size() < 2)
        return st;

    CMatrix sub(cb.atoms.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        sub.col(static_cast<Eigen::Index>(i)) = cb.atoms.col(static_cast<Eigen::Index>(cols[i]));
    const RMatrix gram = (sub.adjoint() * sub).cwiseAbs();

    double total = 0.0;
    for (Eigen::Index j = 1; j < gram.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
        {
            st.max = std::max(st.max, gram(i, j));
            total += gram(i, j);
            ++st.pairs;
        }
    st.mean = total / static_cast<double>(st.pairs);
    return st;
}

} // namespace nfcc

#endif
