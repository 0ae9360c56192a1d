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

#ifndef NFCC_TYPES_HPP
#define NFCC_TYPES_HPP

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace nfcc
{

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// All randomness flows through explicitly passed engines of this type.
using Rng = std::mt19937_64;

inline constexpr double pi = std::numbers::pi;
// Rounded, so that 30 GHz maps to a 0.01 m wavelength.
inline constexpr double speed_of_light = 3.0e8;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives an independent sub-seed from a master seed and a list of tags.
// Order of tags matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t h = mix64(master);
    for (auto t : tags)
        h = mix64(h ^ mix64(t + 0x632BE59BD9B4E019ULL));
    return h;
}

inline std::uint64_t double_tag(double v)
{
    return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v); // folds -0.0 into 0.0
}

// Circularly-symmetric complex Gaussian with variance `variance`.
inline cplx complex_gaussian(Rng &rng, double variance = 1.0)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

} // namespace nfcc

#endif
