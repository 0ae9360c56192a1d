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

#ifndef NFCC_CHARTING_HPP
#define NFCC_CHARTING_HPP

#include "types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nfcc
{

enum class FeatureKind
{
    near_field, // Xi, built from vec(Gamma_k)
    far_field   // F, built from r_k
};

struct DissimilarityMatrix
{
    RMatrix values; // K x K, symmetric, zero diagonal, entries in [0, 2]
    FeatureKind kind = FeatureKind::near_field;

    Eigen::Index size() const { return values.rows(); }
};

// 2 - 2 |a^H b| / (|a| |b|)
inline double cosine_dissimilarity(const RVector &a, const RVector &b)
{
    const double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
    return std::clamp(2.0 - 2.0 * c, 0.0, 2.0);
}

inline DissimilarityMatrix dissimilarity(const std::vector<RVector> &features, FeatureKind kind)
{
    const auto K = static_cast<Eigen::Index>(features.size());
    for (Eigen::Index i = 0; i < K; ++i)
        if (!(features[static_cast<std::size_t>(i)].norm() > 0.0))
            throw std::domain_error("dissimilarity: feature vector of UT " + std::to_string(i) + " has zero norm");
    DissimilarityMatrix d{RMatrix::Zero(K, K), kind};
    for (Eigen::Index j = 1; j < K; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            d.values(i, j) = d.values(j, i) =
                cosine_dissimilarity(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
    return d;
}

// Euclidean distance between two chart points (columns); shared by charting and allocation.
template <typename A, typename B>
double euclidean_distance(const Eigen::MatrixBase<A> &a, const Eigen::MatrixBase<B> &b)
{
    return (a - b).norm();
}

inline std::size_t default_neighbors(std::size_t K)
{
    const auto lg = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(K, 1)))));
    return std::max<std::size_t>(8, lg + 1);
}

struct EmbeddingDiagnostics
{
    std::size_t bridged_edges = 0;          // edges added to join k-NN graph components
    std::vector<std::size_t> zeroed_dims;   // chart dimensions with a non-positive eigenvalue
    double residual_eigen_mass = 0.0;       // positive spectrum mass left outside the chart
    bool degenerate_input = false;          // all dissimilarities zero
};

struct ChartCoordinates
{
    RMatrix coords; // D x K, column k is c_k
    EmbeddingDiagnostics diagnostics;

    Eigen::Index dimension() const { return coords.rows(); }
    Eigen::Index size() const { return coords.cols(); }
};

namespace detail
{

struct DisjointSets
{
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

} // namespace detail

// Symmetric k-nearest-neighbour graph (an edge when either endpoint lists the other),
// with disconnected components joined by repeatedly adding the shortest edge between
// two different components. Missing edges are +inf.
inline RMatrix knn_graph(const RMatrix &dis, std::size_t k, std::size_t *bridged = nullptr)
{
    const auto K = static_cast<std::size_t>(dis.rows());
    constexpr double inf = std::numeric_limits<double>::infinity();
    RMatrix w = RMatrix::Constant(dis.rows(), dis.cols(), inf);
    w.diagonal().setZero();
    detail::DisjointSets sets(K);

    const std::size_t kk = std::min(k, K == 0 ? 0 : K - 1);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < K; ++i)
    {
        order.clear();
        for (std::size_t j = 0; j < K; ++j)
            if (j != i)
                order.push_back(j);
        const auto ii = static_cast<Eigen::Index>(i);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              const double da = dis(ii, static_cast<Eigen::Index>(a));
                              const double db = dis(ii, static_cast<Eigen::Index>(b));
                              return da < db || (da == db && a < b);
                          });
        for (std::size_t n = 0; n < kk; ++n)
        {
            const auto j = static_cast<Eigen::Index>(order[n]);
            w(ii, j) = w(j, ii) = dis(ii, j);
            sets.unite(i, order[n]);
        }
    }

    std::size_t added = 0;
    for (;;)
    {
        double best = inf;
        std::pair<std::size_t, std::size_t> edge{K, K};
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = i + 1; j < K; ++j)
            {
                if (sets.find(i) == sets.find(j))
                    continue;
                const double d = dis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (edge.first == K || d < best)
                {
                    best = d;
                    edge = {i, j};
                }
            }
        if (edge.first == K)
            break;
        const auto a = static_cast<Eigen::Index>(edge.first);
        const auto b = static_cast<Eigen::Index>(edge.second);
        w(a, b) = w(b, a) = best;
        sets.unite(edge.first, edge.second);
        ++added;
    }
    if (bridged)
        *bridged = added;
    return w;
}

// All-pairs shortest paths over a weighted adjacency matrix (+inf = no edge).
inline RMatrix shortest_paths(const RMatrix &w)
{
    const auto K = w.rows();
    constexpr double inf = std::numeric_limits<double>::infinity();
    RMatrix g = RMatrix::Constant(K, K, inf);
    using Item = std::pair<double, Eigen::Index>;
    for (Eigen::Index src = 0; src < K; ++src)
    {
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        g(src, src) = 0.0;
        pq.push({0.0, src});
        while (!pq.empty())
        {
            const auto [d, u] = pq.top();
            pq.pop();
            if (d > g(src, u))
                continue;
            for (Eigen::Index v = 0; v < K; ++v)
            {
                if (v == u || !std::isfinite(w(u, v)))
                    continue;
                const double nd = d + w(u, v);
                if (nd < g(src, v))
                {
                    g(src, v) = nd;
                    pq.push({nd, v});
                }
            }
        }
    }
    return g;
}

inline RMatrix geodesic_distances(const RMatrix &dis, std::size_t k, std::size_t *bridged = nullptr)
{
    return shortest_paths(knn_graph(dis, k, bridged));
}

// Classical MDS of a distance matrix: top-D eigenpairs of -1/2 J G.^2 J.
inline ChartCoordinates classical_mds(const RMatrix &dist, std::size_t D)
{
    const auto K = dist.rows();
    if (static_cast<std::size_t>(K) <= D)
        throw std::domain_error("classical_mds: need more points than chart dimensions");
    ChartCoordinates out;
    out.coords = RMatrix::Zero(static_cast<Eigen::Index>(D), K);

    const RMatrix sq = dist.cwiseAbs2();
    const RVector row_mean = sq.rowwise().mean();
    const RVector col_mean = sq.colwise().mean().transpose();
    const double all_mean = sq.mean();
    RMatrix B = -0.5 * ((sq.colwise() - row_mean).rowwise() - col_mean.transpose());
    B.array() -= 0.5 * all_mean;
    B = (B + B.transpose()).eval() / 2.0;

    if (B.cwiseAbs().maxCoeff() == 0.0)
    {
        out.diagnostics.degenerate_input = true;
        for (std::size_t d = 0; d < D; ++d)
            out.diagnostics.zeroed_dims.push_back(d);
        return out;
    }

    Eigen::SelfAdjointEigenSolver<RMatrix> es(B);
    const RVector &ev = es.eigenvalues(); // ascending
    const double tol = 1e-12 * ev.cwiseAbs().maxCoeff();
    double positive_mass = 0.0;
    for (Eigen::Index i = 0; i < K; ++i)
        positive_mass += std::max(ev[i], 0.0);
    double used = 0.0;
    for (std::size_t d = 0; d < D; ++d)
    {
        const Eigen::Index idx = K - 1 - static_cast<Eigen::Index>(d);
        const double lambda = ev[idx];
        if (!(lambda > tol))
        {
            out.diagnostics.zeroed_dims.push_back(d);
            continue;
        }
        RVector v = es.eigenvectors().col(idx);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0)
            v = -v;
        out.coords.row(static_cast<Eigen::Index>(d)) = v.transpose() * std::sqrt(lambda);
        used += lambda;
    }
    out.diagnostics.residual_eigen_mass = positive_mass > 0.0 ? (positive_mass - used) / positive_mass : 0.0;
    out.coords = out.coords.colwise() - out.coords.rowwise().mean();
    return out;
}

// Isomap: k-NN graph on the dissimilarities, graph geodesics, classical MDS to D dims.
inline ChartCoordinates isomap_embed(const DissimilarityMatrix &dis, std::size_t D, std::size_t k_neighbors)
{
    const auto K = static_cast<std::size_t>(dis.size());
    if (D < 1)
        throw std::domain_error("isomap_embed: chart dimension must be >= 1");
    if (K <= D)
        throw std::domain_error("isomap_embed: need K > D (K = " + std::to_string(K) + ", D = " + std::to_string(D) + ")");
    if (k_neighbors < 1)
        throw std::domain_error("isomap_embed: k_neighbors must be >= 1");
    std::size_t bridged = 0;
    const RMatrix g = geodesic_distances(dis.values, k_neighbors, &bridged);
    ChartCoordinates c = classical_mds(g, D);
    c.diagnostics.bridged_edges = bridged;
    return c;
}

// Pairwise Euclidean distances between the columns of `points`.
inline RMatrix pairwise_distances(const RMatrix &points)
{
    const auto K = points.cols();
    RMatrix d = RMatrix::Zero(K, K);
    for (Eigen::Index j = 1; j < K; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            d(i, j) = d(j, i) = euclidean_distance(points.col(i), points.col(j));
    return d;
}

// Average ranks (1-based), ties share their mean rank.
inline std::vector<double> average_ranks(const std::vector<double> &x)
{
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();)
    {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]])
            ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            r[idx[t]] = avg;
        i = j + 1;
    }
    return r;
}

// Spearman rank correlation; empty when fewer than 2 samples or either side is constant.
inline std::optional<double> spearman(const std::vector<double> &a, const std::vector<double> &b)
{
    if (a.size() != b.size() || a.size() < 2)
        return std::nullopt;
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i)
    {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0)
        return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

struct ChartQuality
{
    std::optional<double> spearman; // over all unordered pairs; empty for K < 3
    double trustworthiness = std::numeric_limits<double>::quiet_NaN();
    double continuity = std::numeric_limits<double>::quiet_NaN();
    std::size_t neighborhood = 0;
};

namespace detail
{

// rank[i][j]: position of j in i's neighbour list under `dist` (1 = nearest).
inline std::vector<std::vector<std::size_t>> neighbor_ranks(const RMatrix &dist)
{
    const auto K = static_cast<std::size_t>(dist.rows());
    std::vector<std::vector<std::size_t>> rank(K, std::vector<std::size_t>(K, 0));
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < K; ++i)
    {
        order.clear();
        for (std::size_t j = 0; j < K; ++j)
            if (j != i)
                order.push_back(j);
        const auto ii = static_cast<Eigen::Index>(i);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double da = dist(ii, static_cast<Eigen::Index>(a));
            const double db = dist(ii, static_cast<Eigen::Index>(b));
            return da < db || (da == db && a < b);
        });
        for (std::size_t r = 0; r < order.size(); ++r)
            rank[i][order[r]] = r + 1;
    }
    return rank;
}

// 1 - 2/(N k (2N - 3k - 1)) sum_i sum_{j in N_k^low(i) \ N_k^high(i)} (r_high(i,j) - k)
inline double neighborhood_preservation(const std::vector<std::vector<std::size_t>> &high,
                                        const std::vector<std::vector<std::size_t>> &low, std::size_t k)
{
    const double N = static_cast<double>(high.size());
    const double kk = static_cast<double>(k);
    const double denom = N * kk * (2.0 * N - 3.0 * kk - 1.0);
    if (!(denom > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    double penalty = 0.0;
    for (std::size_t i = 0; i < high.size(); ++i)
        for (std::size_t j = 0; j < high.size(); ++j)
            if (j != i && low[i][j] <= k && high[i][j] > k)
                penalty += static_cast<double>(high[i][j]) - kk;
    return 1.0 - 2.0 * penalty / denom;
}

} // namespace detail

// Compares chart geometry with ground-truth positions: Spearman correlation of the
// pairwise distances plus trustworthiness and continuity at `neighborhood`.
inline ChartQuality chart_quality(const RMatrix &coords, const RMatrix &reference, std::size_t neighborhood = 10)
{
    if (coords.cols() != reference.cols())
        throw std::invalid_argument("chart_quality: coordinate and reference counts differ");
    const auto K = static_cast<std::size_t>(coords.cols());
    ChartQuality q;
    const RMatrix dc = pairwise_distances(coords);
    const RMatrix dr = pairwise_distances(reference);
    if (K >= 3)
    {
        std::vector<double> a, b;
        for (Eigen::Index j = 1; j < dc.cols(); ++j)
            for (Eigen::Index i = 0; i < j; ++i)
            {
                a.push_back(dc(i, j));
                b.push_back(dr(i, j));
            }
        q.spearman = spearman(a, b);
    }
    q.neighborhood = std::min(neighborhood, K > 1 ? K - 1 : 0);
    if (q.neighborhood >= 1)
    {
        const auto rank_ref = detail::neighbor_ranks(dr);
        const auto rank_chart = detail::neighbor_ranks(dc);
        q.trustworthiness = detail::neighborhood_preservation(rank_ref, rank_chart, q.neighborhood);
        q.continuity = detail::neighborhood_preservation(rank_chart, rank_ref, q.neighborhood);
    }
    return q;
}

} // namespace nfcc

#endif
