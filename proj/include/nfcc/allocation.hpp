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

#ifndef NFCC_ALLOCATION_HPP
#define NFCC_ALLOCATION_HPP

#include "charting.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nfcc
{

enum class Algorithm
{
    ncc,
    fcc,
    random
};

inline std::string_view to_string(Algorithm a)
{
    switch (a)
    {
    case Algorithm::ncc:
        return "ncc";
    case Algorithm::fcc:
        return "fcc";
    case Algorithm::random:
        return "random";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
    if (s == "ncc")
        return Algorithm::ncc;
    if (s == "fcc")
        return Algorithm::fcc;
    if (s == "random")
        return Algorithm::random;
    throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (expected ncc|fcc|random)");
}

// Partition of UTs 0..K-1 over pilots 0..tau-1.
struct PilotAssignment
{
    std::vector<std::vector<std::size_t>> groups; // groups[t] = UTs reusing pilot t
    Algorithm algorithm = Algorithm::ncc;

    std::size_t num_pilots() const { return groups.size(); }
    std::size_t num_uts() const
    {
        std::size_t n = 0;
        for (const auto &g : groups)
            n += g.size();
        return n;
    }
    // pilot index of each UT
    std::vector<std::size_t> pilot_of() const
    {
        std::vector<std::size_t> p(num_uts(), 0);
        for (std::size_t t = 0; t < groups.size(); ++t)
            for (auto k : groups[t])
                p.at(k) = t;
        return p;
    }
};

// Union covers 0..K-1, no group empty, groups disjoint.
inline bool satisfies_constraints(const PilotAssignment &a, std::size_t K)
{
    std::vector<int> seen(K, 0);
    for (const auto &g : a.groups)
    {
        if (g.empty())
            return false;
        for (auto k : g)
        {
            if (k >= K || seen[k]++)
                return false;
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

namespace detail
{

inline void check_pilot_count(std::size_t K, std::size_t tau)
{
    if (tau < 2)
        throw std::domain_error("pilot allocation: tau must be >= 2, got " + std::to_string(tau));
    if (tau > K)
        throw std::domain_error("pilot allocation: tau (" + std::to_string(tau) + ") exceeds K (" +
                                std::to_string(K) + ")");
}

} // namespace detail

// Chart-based greedy allocation. Starting from UT 0 as the centre k* on pilot 0, each
// pass gives pilots 1..tau-1 to the unassigned UTs nearest to k*, one at a time, then
// the next-nearest unassigned UT becomes k* and takes pilot 0. A pass stops early once
// every UT is assigned. Ties go to the smallest UT index.
inline PilotAssignment nearest_neighbor_allocation(const RMatrix &coords, std::size_t tau, Algorithm tag)
{
    const auto K = static_cast<std::size_t>(coords.cols());
    detail::check_pilot_count(K, tau);

    PilotAssignment out;
    out.algorithm = tag;
    out.groups.assign(tau, {});
    std::vector<char> assigned(K, 0);
    std::size_t remaining = K - 1;
    std::size_t centre = 0;
    out.groups[0].push_back(0);
    assigned[0] = 1;

    auto nearest_unassigned = [&](std::size_t from) {
        std::size_t best = K;
        double best_d = 0.0;
        for (std::size_t k = 0; k < K; ++k)
        {
            if (assigned[k])
                continue;
            const double d = euclidean_distance(coords.col(static_cast<Eigen::Index>(k)),
                                                coords.col(static_cast<Eigen::Index>(from)));
            if (best == K || d < best_d)
            {
                best = k;
                best_d = d;
            }
        }
        return best;
    };
    auto take = [&](std::size_t k, std::size_t t) {
        out.groups[t].push_back(k);
        assigned[k] = 1;
        --remaining;
    };

    while (remaining > 0)
    {
        for (std::size_t t = 1; t < tau && remaining > 0; ++t)
            take(nearest_unassigned(centre), t);
        if (remaining == 0)
            break;
        centre = nearest_unassigned(centre);
        take(centre, 0);
    }
    return out;
}

inline PilotAssignment ncc_pa(const ChartCoordinates &chart, std::size_t tau)
{
    return nearest_neighbor_allocation(chart.coords, tau, Algorithm::ncc);
}

inline PilotAssignment fcc_pa(const ChartCoordinates &chart_farfield, std::size_t tau)
{
    return nearest_neighbor_allocation(chart_farfield.coords, tau, Algorithm::fcc);
}

// Uniform random permutation dealt cyclically over the pilots.
inline PilotAssignment random_pa(std::size_t K, std::size_t tau, Rng &rng)
{
    detail::check_pilot_count(K, tau);
    std::vector<std::size_t> perm(K);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    PilotAssignment out;
    out.algorithm = Algorithm::random;
    out.groups.assign(tau, {});
    for (std::size_t i = 0; i < K; ++i)
        out.groups[i % tau].push_back(perm[i]);
    for (auto &g : out.groups)
        std::sort(g.begin(), g.end());
    return out;
}

inline double spectral_norm(const CMatrix &A)
{
    if (A.size() == 0)
        return 0.0;
    Eigen::BDCSVD<CMatrix> svd(A);
    return svd.singularValues()(0);
}

// sum over pilots of sum over same-pilot pairs k < k' of ||Phi_k Phi_k'^H||_2
inline double p1_objective(const PilotAssignment &a, const std::vector<CMatrix> &covariances)
{
    double total = 0.0;
    for (const auto &g : a.groups)
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = i + 1; j < g.size(); ++j)
                total += spectral_norm(covariances.at(g[i]) * covariances.at(g[j]).adjoint());
    return total;
}

// Pairwise ||Phi_k Phi_k'^H||_2 table, for evaluating many assignments of the same UTs.
inline RMatrix pairwise_interference(const std::vector<CMatrix> &covariances)
{
    const auto K = static_cast<Eigen::Index>(covariances.size());
    RMatrix w = RMatrix::Zero(K, K);
    for (Eigen::Index j = 1; j < K; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            w(i, j) = w(j, i) = spectral_norm(covariances[static_cast<std::size_t>(i)] *
                                              covariances[static_cast<std::size_t>(j)].adjoint());
    return w;
}

inline double p1_objective(const PilotAssignment &a, const RMatrix &pairwise)
{
    double total = 0.0;
    for (const auto &g : a.groups)
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = i + 1; j < g.size(); ++j)
                total += pairwise(static_cast<Eigen::Index>(g[i]), static_cast<Eigen::Index>(g[j]));
    return total;
}

// Calls `visit` once for every partition of 0..K-1 into exactly tau non-empty
// unlabeled groups (restricted growth strings). Exponential; meant for small K.
template <typename Visit>
void for_each_partition(std::size_t K, std::size_t tau, Visit &&visit)
{
    detail::check_pilot_count(K, tau);
    std::vector<std::size_t> label(K, 0);
    PilotAssignment a;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
        if (K - i < tau - used)
            return;
        if (i == K)
        {
            a.groups.assign(tau, {});
            for (std::size_t k = 0; k < K; ++k)
                a.groups[label[k]].push_back(k);
            visit(static_cast<const PilotAssignment &>(a));
            return;
        }
        for (std::size_t l = 0; l < std::min(used + 1, tau); ++l)
        {
            label[i] = l;
            rec(i + 1, std::max(used, l + 1));
        }
    };
    rec(0, 0);
}

} // namespace nfcc

#endif
