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

#include <catch_amalgamated.hpp>

#include <nfcc/codebook.hpp>

#include <cmath>

using namespace nfcc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
const ArrayGeometry kFullArray{256, 0.005, 0.01};
}

TEST_CASE("polar grid - sampling laws")
{
    CHECK_THAT(polar_angle(0, 256), WithinRel(-255.0 / 256.0, 1e-15));
    CHECK_THAT(polar_angle(255, 256), WithinRel(255.0 / 256.0, 1e-15));
    CHECK_THAT(ring_distance(0.0, 1, kFullArray, 1.8), WithinRel(1.6384 / 0.036, 1e-12));
    CHECK_THAT(ring_distance(0.0, 1, kFullArray, 1.8), WithinAbs(45.511, 1e-3));
    CHECK_THAT(ring_distance(0.0, 12, kFullArray, 1.8), WithinAbs(3.7926, 1e-4));
}

TEST_CASE("build_polar_codebook - structure")
{
    const ArrayGeometry array{32, 0.005, 0.01};
    const auto cb = build_polar_codebook(array, 5, 1.8);
    REQUIRE(cb.atoms.rows() == 32);
    REQUIRE(cb.atoms.cols() == 32 * 5);
    REQUIRE(cb.size() == 160);

    for (std::size_t s = 1; s <= 5; ++s)
        for (std::size_t m = 0; m < 32; ++m)
        {
            const auto c = static_cast<Eigen::Index>(cb.column(m, s));
            const auto &a = cb.grid[static_cast<std::size_t>(c)];
            CHECK(a.angle_index == m);
            CHECK(a.ring == s);
            CHECK_THAT(cb.atoms.col(c).norm(), WithinAbs(1.0, 1e-12));
            // bit-for-bit reproduction of the steering vector
            CHECK(cb.atoms.col(c) == near_field_steering(a.theta, a.distance_m, array));
            if (m > 0)
                CHECK(a.theta > cb.grid[cb.column(m - 1, s)].theta);
            if (s > 1)
                CHECK(a.distance_m < cb.grid[cb.column(m, s - 1)].distance_m);
        }
}

TEST_CASE("build_polar_codebook - from scenario config")
{
    const auto cb = build_polar_codebook(ScenarioConfig::full_scale());
    CHECK(cb.atoms.cols() == 256 * 12);
    CHECK(cb.beta_delta == 1.8);
}

TEST_CASE("build_dft_codebook - unitarity")
{
    for (std::size_t M : {2u, 7u, 256u})
    {
        const CMatrix D = build_dft_codebook(M);
        const CMatrix g = D.adjoint() * D;
        CHECK((g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("build_dft_codebook - far-field limit of the near-field response")
{
    const std::size_t M = 16;
    const ArrayGeometry array{M, 0.005, 0.01};
    const CMatrix D = build_dft_codebook(M);
    for (std::size_t m = 0; m < M; ++m)
    {
        const CVector b = near_field_steering(polar_angle(m, M), 1e9, array);
        CHECK((D.col(static_cast<Eigen::Index>(m)) - b).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("codebook_coherence - exhaustive small case")
{
    const auto cb = build_polar_codebook(ArrayGeometry{4, 0.005, 0.01}, 2, 1.8);
    const auto st = codebook_coherence(cb);
    REQUIRE(st.exhaustive);
    REQUIRE(st.pairs == 28);

    double mx = 0.0, sum = 0.0;
    for (Eigen::Index i = 0; i < cb.atoms.cols(); ++i)
        for (Eigen::Index j = i + 1; j < cb.atoms.cols(); ++j)
        {
            const double v = std::abs(cb.atoms.col(i).dot(cb.atoms.col(j)));
            mx = std::max(mx, v);
            sum += v;
        }
    CHECK_THAT(st.max, WithinAbs(mx, 1e-14));
    CHECK_THAT(st.mean, WithinAbs(sum / 28.0, 1e-14));
    // Frozen from an independent NumPy enumeration of all 28 pairs.
    CHECK_THAT(st.max, WithinAbs(0.902685212428734, 1e-12));
    CHECK_THAT(st.mean, WithinAbs(0.515795773349748, 1e-12));
}

TEST_CASE("codebook_coherence - full-scale regression baseline")
{
    // Exhaustive NumPy enumeration over all 4,717,056 pairs gives
    // mean 0.022386865 and max 0.988223864; the subsample must land close.
    const auto cb = build_polar_codebook(kFullArray, 12, 1.8);
    const auto st = codebook_coherence(cb, 768, 1);
    CHECK_FALSE(st.exhaustive);
    CHECK(st.mean < 0.5);
    CHECK_THAT(st.mean, WithinAbs(0.0223868655, 0.003));
    CHECK(st.max <= 0.9882238639038871 + 1e-9);
}
