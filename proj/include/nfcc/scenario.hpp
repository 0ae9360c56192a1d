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

#ifndef NFCC_SCENARIO_HPP
#define NFCC_SCENARIO_HPP

#include "types.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfcc
{

struct Interval
{
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
    double width() const { return hi - lo; }
};

// Uniform linear array description. Element n sits at offset (n - (M-1)/2) * spacing
// along the array axis.
struct ArrayGeometry
{
    std::size_t num_antennas = 0;
    double spacing_m = 0.0;
    double wavelength_m = 0.0;
};

// 2 M^2 d^2 / lambda
inline double rayleigh_distance(const ArrayGeometry &array)
{
    const double M = static_cast<double>(array.num_antennas);
    return 2.0 * M * M * array.spacing_m * array.spacing_m / array.wavelength_m;
}

struct ScenarioConfig
{
    double carrier_frequency_hz = 30e9;
    std::size_t num_antennas = 256;
    std::optional<double> antenna_spacing_m; // half wavelength when unset
    std::size_t num_uts = 16;
    std::size_t num_paths = 6;
    std::size_t paths_detected = 12; // SOMP atoms
    std::size_t num_distance_samples = 12;
    double beta_delta = 1.8;
    std::size_t num_covariance_draws = 500;
    std::size_t chart_dimension = 2;
    std::size_t pilot_length = 4;
    double snr = 10.0; // linear
    std::uint64_t rng_seed = 1;
    Interval ut_angle_range_rad{-pi / 3.0, pi / 3.0};
    Interval ut_distance_range_m{5.0, 70.0};
    double angular_dispersion_rad = pi / 6.0; // 30 degrees, full width
    double distance_dispersion = 0.2;         // relative half-width of the per-path distance window
    double pathloss_exponent = 0.0;           // 0 gives unit large-scale gain for every UT
    std::size_t k_neighbors = 0;              // 0 selects the Isomap default
    std::size_t rate_trials = 200;            // Monte-Carlo trials for the sum-rate surrogate

    double wavelength() const { return speed_of_light / carrier_frequency_hz; }
    double spacing() const { return antenna_spacing_m.value_or(wavelength() / 2.0); }
    ArrayGeometry array() const { return {num_antennas, spacing(), wavelength()}; }

    // Full-scale setup: 30 GHz, 256 antennas, 16 UTs, 6 paths, S = 12, beta = 1.8.
    static ScenarioConfig full_scale() { return {}; }

    // Full-scale parameters on a smaller array. All lengths of the scene (UT distance
    // range) shrink by (M/256)^2 so the UTs occupy the same fraction of the near
    // field and the same polar-codebook rings as in the full-size setup.
    static ScenarioConfig desk_scale(std::size_t M)
    {
        ScenarioConfig c = full_scale();
        c.num_antennas = M;
        const double f = (static_cast<double>(M) / 256.0) * (static_cast<double>(M) / 256.0);
        c.ut_distance_range_m = {5.0 * f, 70.0 * f};
        return c;
    }

    void validate() const
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("ScenarioConfig: " + msg); };
        if (!(carrier_frequency_hz > 0.0))
            fail("carrier_frequency must be positive");
        if (num_antennas < 2)
            fail("num_antennas must be >= 2");
        if (antenna_spacing_m && !(*antenna_spacing_m > 0.0))
            fail("antenna_spacing must be positive");
        if (num_uts < 2)
            fail("num_uts must be >= 2");
        if (pilot_length < 2 || pilot_length > num_uts)
            fail("pilot_length must satisfy 2 <= tau <= K");
        if (num_paths < 1)
            fail("num_paths must be >= 1");
        if (num_distance_samples < 1)
            fail("num_distance_samples must be >= 1");
        if (chart_dimension < 1)
            fail("chart_dimension must be >= 1");
        if (num_covariance_draws < 1)
            fail("num_covariance_draws must be >= 1");
        if (paths_detected < 1 || paths_detected > num_antennas * num_distance_samples)
            fail("paths_detected must lie in [1, M*S]");
        if (!(beta_delta > 0.0))
            fail("beta_delta must be positive");
        if (!(snr > 0.0))
            fail("snr must be positive");
        if (!(ut_distance_range_m.lo > 0.0) || !(ut_distance_range_m.hi >= ut_distance_range_m.lo))
            fail("ut_distance_range must be a positive interval");
        if (!(ut_angle_range_rad.hi >= ut_angle_range_rad.lo))
            fail("ut_angle_range must be an interval");
        if (angular_dispersion_rad < 0.0)
            fail("angular_dispersion must be non-negative");
        if (ut_angle_range_rad.lo - angular_dispersion_rad / 2.0 <= -pi / 2.0 ||
            ut_angle_range_rad.hi + angular_dispersion_rad / 2.0 >= pi / 2.0)
            fail("ut_angle_range widened by angular_dispersion must stay inside (-pi/2, pi/2)");
        if (distance_dispersion < 0.0 || distance_dispersion >= 1.0)
            fail("distance_dispersion must lie in [0, 1)");
        if (pathloss_exponent < 0.0)
            fail("pathloss_exponent must be non-negative");
        if (rate_trials < 1)
            fail("rate_trials must be >= 1");
        const double r = rayleigh_distance(array());
        if (!(ut_distance_range_m.hi < r))
            fail("ut_distance_range upper bound " + std::to_string(ut_distance_range_m.hi) +
                 " m is not below the Rayleigh distance " + std::to_string(r) + " m");
    }
};

inline double rayleigh_distance(const ScenarioConfig &config)
{
    config.validate();
    return rayleigh_distance(config.array());
}

struct PathParams
{
    double theta = 0.0;      // direction sine in [-1, 1]
    double distance_m = 0.0; // rho
    cplx gain{1.0, 0.0};
};

struct UtGeometry
{
    std::vector<std::vector<PathParams>> paths; // [ut][path]
    std::vector<double> large_scale_gain;       // xi_k
    std::vector<double> mean_azimuth_rad;
    std::vector<double> mean_distance_m;

    std::size_t num_uts() const { return paths.size(); }

    // UT positions in the array frame: x along broadside, y along the array axis. 2 x K.
    RMatrix true_positions() const
    {
        RMatrix p(2, static_cast<Eigen::Index>(num_uts()));
        for (std::size_t k = 0; k < num_uts(); ++k)
        {
            p(0, static_cast<Eigen::Index>(k)) = mean_distance_m[k] * std::cos(mean_azimuth_rad[k]);
            p(1, static_cast<Eigen::Index>(k)) = mean_distance_m[k] * std::sin(mean_azimuth_rad[k]);
        }
        return p;
    }
};

inline constexpr int max_placement_retries = 100;

// Draws UT mean locations and per-path scatterer geometry.
//
// Mean azimuth ~ U(ut_angle_range), mean distance ~ U(ut_distance_range). Each path
// takes an azimuth uniformly within +-angular_dispersion/2 of the mean and a distance
// uniformly within +-distance_dispersion (relative) of the mean distance. Paths falling
// outside the distance range or beyond the Rayleigh distance are redrawn.
inline UtGeometry place_uts(const ScenarioConfig &config, Rng &rng)
{
    config.validate();
    const double r_max = rayleigh_distance(config.array());
    const auto &ar = config.ut_angle_range_rad;
    const auto &dr = config.ut_distance_range_m;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto in_region = [&](double rho) { return dr.contains(rho) && rho < r_max; };

    UtGeometry g;
    const std::size_t K = config.num_uts;
    g.paths.resize(K);
    g.large_scale_gain.resize(K);
    g.mean_azimuth_rad.resize(K);
    g.mean_distance_m.resize(K);

    for (std::size_t k = 0; k < K; ++k)
    {
        const double phi = uniform(ar.lo, ar.hi);
        double rho = 0.0;
        int tries = 0;
        do
        {
            if (tries++ >= max_placement_retries)
                throw std::runtime_error("place_uts: could not place UT " + std::to_string(k) +
                                         " inside the near-field region");
            rho = uniform(dr.lo, dr.hi);
        } while (!in_region(rho));

        g.mean_azimuth_rad[k] = phi;
        g.mean_distance_m[k] = rho;
        g.large_scale_gain[k] =
            config.pathloss_exponent == 0.0 ? 1.0 : std::pow(rho / dr.lo, -config.pathloss_exponent);

        auto &paths = g.paths[k];
        paths.resize(config.num_paths);
        for (auto &p : paths)
        {
            const double half = config.angular_dispersion_rad / 2.0;
            p.theta = std::sin(phi + uniform(-half, half));
            tries = 0;
            do
            {
                if (tries++ >= max_placement_retries)
                    throw std::runtime_error("place_uts: path distance of UT " + std::to_string(k) +
                                             " keeps leaving the configured region; "
                                             "reduce distance_dispersion or widen ut_distance_range");
                const double w = config.distance_dispersion;
                p.distance_m = rho * uniform(1.0 - w, 1.0 + w);
            } while (!in_region(p.distance_m));
            p.gain = complex_gaussian(rng);
        }
    }
    return g;
}

} // namespace nfcc

#endif
