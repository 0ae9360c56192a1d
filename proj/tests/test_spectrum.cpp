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

#include <nfcc/spectrum.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace nfcc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

const ArrayGeometry kSmall{16, 0.005, 0.01};

ChannelSet from_draws(std::vector<CMatrix> draws, bool with_covariance = true)
{
    ChannelSet c;
    c.draws = std::move(draws);
    c.large_scale_gain.assign(c.draws.size(), 1.0);
    if (with_covariance)
        c.covariances = sample_covariance(c);
    return c;
}

CMatrix random_draws(Rng &rng, Eigen::Index M, Eigen::Index N)
{
    CMatrix d(M, N);
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d.data()[i] = complex_gaussian(rng);
    return d;
}

// Least-squares residual energy of Y on the columns `cols` of D.
double subset_residual(const CMatrix &Y, const CMatrix &D, const std::vector<Eigen::Index> &cols)
{
    CMatrix A(D.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        A.col(static_cast<Eigen::Index>(i)) = D.col(cols[i]);
    const CMatrix x = A.colPivHouseholderQr().solve(Y);
    return (Y - A * x).squaredNorm();
}

} // namespace

TEST_CASE("feature method names")
{
    CHECK(parse_feature_method("projection") == FeatureMethod::projection);
    CHECK(parse_feature_method("somp") == FeatureMethod::somp);
    CHECK(to_string(FeatureMethod::somp) == "somp");
    CHECK_THROWS_AS(parse_feature_method("omp"), std::invalid_argument);
}

TEST_CASE("polar_projection_spectrum - atom as channel")
{
    const auto cb = build_polar_codebook(kSmall, 3, 1.8);
    const std::size_t m0 = 5, s0 = 2;
    const auto c0 = static_cast<Eigen::Index>(cb.column(m0, s0));
    const auto fs = polar_projection_spectrum(from_draws({CMatrix(cb.atoms.col(c0))}), cb);
    REQUIRE(fs.num_uts() == 1);
    const RMatrix &g = fs.polar[0];
    REQUIRE(g.rows() == 16);
    REQUIRE(g.cols() == 3);
    CHECK_THAT(g(5, 1), WithinAbs(1.0, 1e-12));
    for (std::size_t s = 1; s <= 3; ++s)
        for (std::size_t m = 0; m < 16; ++m)
        {
            const double coh = std::abs(cb.atoms.col(static_cast<Eigen::Index>(cb.column(m, s))).dot(cb.atoms.col(c0)));
            CHECK_THAT(g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s - 1)), WithinAbs(coh * coh, 1e-12));
        }
    CHECK((fs.farfield[0] - g.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("polar_projection_spectrum - zero channel")
{
    const auto cb = build_polar_codebook(kSmall, 2, 1.8);
    const auto fs = polar_projection_spectrum(from_draws({CMatrix::Zero(16, 4)}), cb);
    CHECK(fs.polar[0].cwiseAbs().maxCoeff() == 0.0);
    CHECK(fs.farfield[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("polar_projection_spectrum - double-loop oracle")
{
    const auto cb = build_polar_codebook(kSmall, 3, 1.8);
    Rng rng(3);
    // 10 draws use the draw path, 40 draws the covariance path
    for (Eigen::Index N : {10, 40})
    {
        const CMatrix d = random_draws(rng, 16, N);
        const auto fs = polar_projection_spectrum(from_draws({d}), cb);
        for (Eigen::Index c = 0; c < cb.atoms.cols(); ++c)
        {
            double acc = 0.0;
            for (Eigen::Index n = 0; n < N; ++n)
            {
                cplx ip(0.0, 0.0);
                for (Eigen::Index i = 0; i < 16; ++i)
                    ip += std::conj(cb.atoms(i, c)) * d(i, n);
                acc += std::norm(ip);
            }
            const auto &a = cb.grid[static_cast<std::size_t>(c)];
            CHECK_THAT(fs.polar[0](static_cast<Eigen::Index>(a.angle_index), static_cast<Eigen::Index>(a.ring - 1)),
                       WithinRel(acc / static_cast<double>(N), 1e-10));
        }
    }
}

TEST_CASE("polar_projection_spectrum - properties")
{
    const auto cb = build_polar_codebook(kSmall, 2, 1.8);
    Rng rng(8);
    const CMatrix d = random_draws(rng, 16, 12);
    const auto a = polar_projection_spectrum(from_draws({d}), cb);
    const auto b = polar_projection_spectrum(from_draws({CMatrix(std::polar(1.0, 1.234) * d)}), cb);
    CHECK(a.polar[0].minCoeff() >= 0.0);
    CHECK((a.polar[0] - b.polar[0]).cwiseAbs().maxCoeff() < 1e-12 * a.polar[0].maxCoeff());
    CHECK(a.method == FeatureMethod::projection);
    const auto v = a.vectorized();
    REQUIRE(v[0].size() == 32);
    for (std::size_t c = 0; c < cb.size(); ++c)
        CHECK(v[0][static_cast<Eigen::Index>(c)] ==
              a.polar[0](static_cast<Eigen::Index>(cb.grid[c].angle_index), static_cast<Eigen::Index>(cb.grid[c].ring - 1)));
}

TEST_CASE("spectra - dimension mismatch")
{
    const auto cb = build_polar_codebook(kSmall, 2, 1.8);
    const auto ch = from_draws({CMatrix::Zero(8, 2)});
    CHECK_THROWS_AS(polar_projection_spectrum(ch, cb), std::domain_error);
    CHECK_THROWS_AS(somp_spectrum(ch, cb, 2), std::domain_error);
    CHECK_THROWS_AS(farfield_spectrum(ch, build_dft_codebook(16)), std::domain_error);
    CHECK_THROWS_AS(farfield_spectrum(CMatrix::Identity(8, 8), build_dft_codebook(16)), std::domain_error);
}

TEST_CASE("somp - single atom, exact recovery")
{
    const auto cb = build_polar_codebook(kSmall, 3, 1.8);
    const auto c0 = static_cast<Eigen::Index>(cb.column(11, 3));
    const cplx gain = std::polar(1.7, -0.4);
    const auto r = somp(CMatrix(gain * cb.atoms.col(c0)), cb.atoms, 1);
    REQUIRE(r.support.size() == 1);
    CHECK(r.support[0] == static_cast<std::size_t>(c0));
    CHECK_THAT(std::norm(r.coefficients(0, 0)), WithinRel(1.7 * 1.7, 1e-12));

    const auto fs = somp_spectrum(from_draws({CMatrix(gain * cb.atoms.col(c0))}), cb, 1);
    CHECK_THAT(fs.polar[0](11, 2), WithinRel(1.7 * 1.7, 1e-12));
    CHECK(fs.polar[0].sum() == fs.polar[0](11, 2));
    CHECK(fs.method == FeatureMethod::somp);
}

TEST_CASE("somp - on-grid multi-atom recovery against exhaustive search")
{
    const auto cb = build_polar_codebook(kSmall, 2, 1.8);
    const std::vector<Eigen::Index> truth{static_cast<Eigen::Index>(cb.column(2, 1)),
                                          static_cast<Eigen::Index>(cb.column(8, 2)),
                                          static_cast<Eigen::Index>(cb.column(13, 1))};
    Rng rng(17);
    CMatrix Y = CMatrix::Zero(16, 20);
    for (auto c : truth)
        for (Eigen::Index n = 0; n < Y.cols(); ++n)
            Y.col(n) += complex_gaussian(rng) * cb.atoms.col(c);

    // exhaustive oracle over all 3-subsets of the 32 atoms
    std::vector<Eigen::Index> best;
    double best_res = std::numeric_limits<double>::infinity();
    const Eigen::Index A = cb.atoms.cols();
    for (Eigen::Index i = 0; i < A; ++i)
        for (Eigen::Index j = i + 1; j < A; ++j)
            for (Eigen::Index l = j + 1; l < A; ++l)
            {
                const double res = subset_residual(Y, cb.atoms, {i, j, l});
                if (res < best_res)
                {
                    best_res = res;
                    best = {i, j, l};
                }
            }
    REQUIRE(std::set<Eigen::Index>(best.begin(), best.end()) == std::set<Eigen::Index>(truth.begin(), truth.end()));

    const auto r = somp(Y, cb.atoms, 3);
    std::set<Eigen::Index> got;
    for (auto s : r.support)
        got.insert(static_cast<Eigen::Index>(s));
    CHECK(got == std::set<Eigen::Index>(best.begin(), best.end()));
    CHECK(r.residual_energy < 1e-20 * r.input_energy);
}

TEST_CASE("somp - full dictionary spans the input")
{
    const auto cb = build_polar_codebook(ArrayGeometry{8, 0.005, 0.01}, 2, 1.8);
    Rng rng(2);
    const CMatrix Y = random_draws(rng, 8, 6);
    const auto r = somp(Y, cb.atoms, cb.size());
    CHECK(r.residual_energy < 1e-8 * r.input_energy);
    CHECK(r.support.size() <= cb.size());
    CHECK(r.support.size() >= 6);
}

TEST_CASE("somp - rank-deficient candidates are dropped")
{
    CMatrix D(2, 3);
    D.col(0) = CVector::Unit(2, 0);
    D.col(1) = CVector::Unit(2, 0) * cplx(0.0, 1.0); // same line as column 0
    D.col(2) = CVector::Unit(2, 1);
    CMatrix Y(2, 1);
    Y << cplx(3.0, 0.0), cplx(1.0, 0.0);
    const auto r = somp(Y, D, 3);
    REQUIRE(r.support.size() == 2);
    CHECK(r.dropped.size() <= 1);
    CHECK(r.residual_energy < 1e-20);
}

TEST_CASE("somp - argument checks")
{
    const CMatrix D = CMatrix::Identity(4, 4);
    CHECK_THROWS_AS(somp(CMatrix::Ones(4, 1), D, 0), std::domain_error);
    CHECK_THROWS_AS(somp(CMatrix::Ones(4, 1), D, 5), std::domain_error);
    CHECK_THROWS_AS(somp(CMatrix::Ones(3, 1), D, 2), std::domain_error);
    const auto r = somp(CMatrix::Zero(4, 2), D, 2);
    CHECK(r.support.empty());
}

TEST_CASE("somp_spectrum - snapshot compression is exact")
{
    const auto cb = build_polar_codebook(kSmall, 2, 1.8);
    Rng rng(4);
    // low-rank draws, many more snapshots than antennas
    CMatrix basis(16, 3);
    basis << cb.atoms.col(3), cb.atoms.col(20), cb.atoms.col(27);
    const CMatrix d = basis * random_draws(rng, 3, 200);

    const auto fast = somp_spectrum(from_draws({d}), cb, 5);
    const auto raw = somp(d, cb.atoms, 5);
    RVector direct = RVector::Zero(32);
    for (std::size_t i = 0; i < raw.support.size(); ++i)
        direct[static_cast<Eigen::Index>(raw.support[i])] =
            raw.coefficients.row(static_cast<Eigen::Index>(i)).squaredNorm() / 200.0;
    CHECK((fast.vectorized()[0] - direct).cwiseAbs().maxCoeff() < 1e-9 * direct.maxCoeff());
    CHECK((fast.vectorized()[0].array() > 0.0).count() <= 5);

    // also without a stored covariance
    const auto no_cov = somp_spectrum(from_draws({d}, false), cb, 5);
    CHECK((no_cov.vectorized()[0] - direct).cwiseAbs().maxCoeff() < 1e-9 * direct.maxCoeff());
}

TEST_CASE("somp_spectrum - global phase invariance")
{
    const auto cb = build_polar_codebook(kSmall, 2, 1.8);
    Rng rng(5);
    const CMatrix d = random_draws(rng, 16, 10);
    const auto a = somp_spectrum(from_draws({d}), cb, 4);
    const auto b = somp_spectrum(from_draws({CMatrix(std::polar(1.0, 2.5) * d)}), cb, 4);
    CHECK((a.polar[0] - b.polar[0]).cwiseAbs().maxCoeff() < 1e-10 * a.polar[0].maxCoeff());
    CHECK_THROWS_AS(somp_spectrum(from_draws({d}), cb, 0), std::domain_error);
    CHECK_THROWS_AS(somp_spectrum(from_draws({d}), cb, 33), std::domain_error);
}

TEST_CASE("farfield_spectrum - identity and trace")
{
    const CMatrix D = build_dft_codebook(16);
    const RVector r = farfield_spectrum(CMatrix::Identity(16, 16), D);
    CHECK((r - RVector::Ones(16)).cwiseAbs().maxCoeff() < 1e-12);

    Rng rng(6);
    const auto ch = from_draws({random_draws(rng, 16, 7), random_draws(rng, 16, 30)});
    const auto rs = farfield_spectrum(ch, D);
    for (std::size_t k = 0; k < 2; ++k)
    {
        CHECK(rs[k].minCoeff() >= 0.0);
        CHECK_THAT(rs[k].sum(), WithinRel(ch.covariances[k].trace().real(), 1e-8));
    }
}

TEST_CASE("farfield_spectrum - on-grid planar wave")
{
    const CMatrix D = build_dft_codebook(16);
    const ArrayGeometry half{16, 0.005, 0.01};
    for (std::size_t m : {0u, 4u, 15u})
    {
        const CVector h = far_field_steering(polar_angle(m, 16), half);
        const auto r = farfield_spectrum(from_draws({CMatrix(h)}), D);
        CHECK(r[0][static_cast<Eigen::Index>(m)] >= 0.99 * r[0].sum());
    }
}
