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

#ifndef NFCC_SPECTRUM_HPP
#define NFCC_SPECTRUM_HPP

#include "codebook.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nfcc
{

enum class FeatureMethod
{
    projection,
    somp
};

inline std::string_view to_string(FeatureMethod m) { return m == FeatureMethod::projection ? "projection" : "somp"; }

inline FeatureMethod parse_feature_method(std::string_view s)
{
    if (s == "projection")
        return FeatureMethod::projection;
    if (s == "somp")
        return FeatureMethod::somp;
    throw std::invalid_argument("unknown feature method '" + std::string(s) + "' (expected projection|somp)");
}

// Per-UT polar-domain power spectra. polar[k](m, s-1) is the average power of UT k
// on atom (theta_m, rho_s); its column-major vectorization follows the codebook's
// column order. farfield[k] is the sum of polar[k] over the rings.
struct FeatureSet
{
    std::vector<RMatrix> polar;    // M x S per UT
    std::vector<RVector> farfield; // M per UT
    FeatureMethod method = FeatureMethod::projection;

    std::size_t num_uts() const { return polar.size(); }

    std::vector<RVector> vectorized() const
    {
        std::vector<RVector> v;
        v.reserve(polar.size());
        for (const auto &g : polar)
            v.emplace_back(g.reshaped());
        return v;
    }
};

namespace detail
{

inline void require_antennas(const ChannelSet &channels, Eigen::Index rows, const char *who)
{
    for (std::size_t k = 0; k < channels.num_uts(); ++k)
        if (channels.draws[k].rows() != rows)
            throw std::domain_error(std::string(who) + ": UT " + std::to_string(k) + " has " +
                                    std::to_string(channels.draws[k].rows()) + " antennas, codebook expects " +
                                    std::to_string(rows));
}

// diag(A^H Phi A)
inline RVector quadratic_diagonal(const CMatrix &A, const CMatrix &phi)
{
    return (A.adjoint() * phi).cwiseProduct(A.transpose()).rowwise().sum().real().cwiseMax(0.0);
}

// Average |A^H h|^2 over the columns of `draws`. Uses the covariance when that is
// cheaper than touching every draw.
inline RVector average_projected_power(const CMatrix &A, const CMatrix &draws, const CMatrix *covariance)
{
    if (draws.cols() == 0)
        return RVector::Zero(A.cols());
    if (covariance && covariance->rows() == A.rows() && draws.cols() > A.rows())
        return quadratic_diagonal(A, *covariance);
    return (A.adjoint() * draws).cwiseAbs2().rowwise().sum() / static_cast<double>(draws.cols());
}

inline const CMatrix *covariance_of(const ChannelSet &channels, std::size_t k)
{
    return k < channels.covariances.size() ? &channels.covariances[k] : nullptr;
}

inline FeatureSet finish_features(std::vector<RVector> vecs, std::size_t M, std::size_t S, FeatureMethod method)
{
    FeatureSet fs;
    fs.method = method;
    for (auto &v : vecs)
    {
        RMatrix g = v.reshaped(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(S));
        fs.farfield.emplace_back(g.rowwise().sum());
        fs.polar.push_back(std::move(g));
    }
    return fs;
}

} // namespace detail

// Gamma_k(m, s) = mean over draws of |w_{m,s}^H h|^2, i.e. diag of the averaged h^p (h^p)^H
// with h^p = W^H h.
inline FeatureSet polar_projection_spectrum(const ChannelSet &channels, const PolarCodebook &cb)
{
    detail::require_antennas(channels, cb.atoms.rows(), "polar_projection_spectrum");
    std::vector<RVector> vecs;
    for (std::size_t k = 0; k < channels.num_uts(); ++k)
        vecs.push_back(
            detail::average_projected_power(cb.atoms, channels.draws[k], detail::covariance_of(channels, k)));
    return detail::finish_features(std::move(vecs), cb.num_angles, cb.num_rings, FeatureMethod::projection);
}

struct SompResult
{
    std::vector<std::size_t> support; // dictionary columns in selection order
    CMatrix coefficients;             // |support| x N least-squares coefficients
    std::vector<std::size_t> dropped; // atoms rejected for making the support rank deficient
    double input_energy = 0.0;
    double residual_energy = 0.0;
};

// Simultaneous orthogonal matching pursuit on the snapshot matrix Y (M x N) with a
// unit-norm dictionary (M x A). Each step picks the atom with the largest summed
// squared correlation against the residual over all snapshots, then refits all
// selected atoms by least squares. Stops after `num_atoms` atoms or once the residual
// vanishes.
inline SompResult somp(const CMatrix &Y, const CMatrix &dictionary, std::size_t num_atoms)
{
    const auto A = dictionary.cols();
    if (num_atoms < 1 || num_atoms > static_cast<std::size_t>(A))
        throw std::domain_error("somp: num_atoms must lie in [1, " + std::to_string(A) + "]");
    if (Y.rows() != dictionary.rows())
        throw std::domain_error("somp: snapshot and dictionary dimensions differ");

    SompResult res;
    res.input_energy = Y.squaredNorm();
    res.residual_energy = res.input_energy;
    res.coefficients.resize(0, Y.cols());
    if (res.input_energy == 0.0)
        return res;

    const CMatrix corr0 = dictionary.adjoint() * Y; // A x N
    CMatrix corr = corr0;
    std::vector<char> blocked(static_cast<std::size_t>(A), 0);
    CMatrix selected(Y.rows(), 0);
    const double vanish = 1e-24 * res.input_energy;

    while (res.support.size() < num_atoms)
    {
        RVector score = corr.cwiseAbs2().rowwise().sum();
        Eigen::Index best = -1;
        for (Eigen::Index a = 0; a < A; ++a)
            if (!blocked[static_cast<std::size_t>(a)] && (best < 0 || score[a] > score[best]))
                best = a;
        if (best < 0 || score[best] <= vanish)
            break;
        blocked[static_cast<std::size_t>(best)] = 1;

        CMatrix trial(Y.rows(), selected.cols() + 1);
        trial << selected, dictionary.col(best);
        Eigen::ColPivHouseholderQR<CMatrix> qr(trial);
        qr.setThreshold(1e-10);
        if (qr.rank() < trial.cols())
        {
            res.dropped.push_back(static_cast<std::size_t>(best));
            continue;
        }
        selected = std::move(trial);
        res.support.push_back(static_cast<std::size_t>(best));
        res.coefficients = qr.solve(Y);
        corr = corr0 - (dictionary.adjoint() * selected) * res.coefficients;
        res.residual_energy = (Y - selected * res.coefficients).squaredNorm();
        if (res.residual_energy <= vanish)
            break;
    }
    return res;
}

namespace detail
{

// Returns F with F F^H = Y Y^H and at most min(M, N) columns. SOMP supports and the
// coefficient second moments depend on Y only through Y Y^H.
inline CMatrix compress_snapshots(const CMatrix &Y, const CMatrix *covariance)
{
    if (Y.cols() <= Y.rows())
        return Y;
    const CMatrix gram = covariance ? CMatrix(*covariance * static_cast<double>(Y.cols())) : CMatrix(Y * Y.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
    const RVector &ev = es.eigenvalues();
    const double cutoff = 1e-13 * std::max(ev.maxCoeff(), 0.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > cutoff)
            keep.push_back(i);
    CMatrix F(Y.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        F.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev[keep[j]]);
    return F;
}

} // namespace detail

// Gamma_k holds the average squared SOMP coefficient of each selected atom (zeros elsewhere).
inline FeatureSet somp_spectrum(const ChannelSet &channels, const PolarCodebook &cb, std::size_t num_atoms)
{
    detail::require_antennas(channels, cb.atoms.rows(), "somp_spectrum");
    if (num_atoms < 1 || num_atoms > cb.size())
        throw std::domain_error("somp_spectrum: num_atoms must lie in [1, M*S]");
    std::vector<RVector> vecs;
    for (std::size_t k = 0; k < channels.num_uts(); ++k)
    {
        const CMatrix &Y = channels.draws[k];
        RVector v = RVector::Zero(static_cast<Eigen::Index>(cb.size()));
        if (Y.cols() > 0)
        {
            const CMatrix F = detail::compress_snapshots(Y, detail::covariance_of(channels, k));
            const SompResult r = somp(F, cb.atoms, num_atoms);
            for (std::size_t i = 0; i < r.support.size(); ++i)
                v[static_cast<Eigen::Index>(r.support[i])] =
                    r.coefficients.row(static_cast<Eigen::Index>(i)).squaredNorm() / static_cast<double>(Y.cols());
        }
        vecs.push_back(std::move(v));
    }
    return detail::finish_features(std::move(vecs), cb.num_angles, cb.num_rings, FeatureMethod::somp);
}

// r = diag(D^H Phi D)
inline RVector farfield_spectrum(const CMatrix &covariance, const CMatrix &dft)
{
    if (covariance.rows() != dft.rows() || covariance.cols() != dft.rows())
        throw std::domain_error("farfield_spectrum: covariance and DFT dimensions differ");
    return detail::quadratic_diagonal(dft, covariance);
}

inline std::vector<RVector> farfield_spectrum(const ChannelSet &channels, const CMatrix &dft)
{
    detail::require_antennas(channels, dft.rows(), "farfield_spectrum");
    std::vector<RVector> out;
    for (std::size_t k = 0; k < channels.num_uts(); ++k)
        out.push_back(detail::average_projected_power(dft, channels.draws[k], detail::covariance_of(channels, k)));
    return out;
}

} // namespace nfcc

#endif
