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

#ifndef NFCC_EVALUATION_HPP
#define NFCC_EVALUATION_HPP

#include "allocation.hpp"
#include "channel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nfcc
{

struct EvaluationResult
{
    std::vector<double> mse; // epsilon_k
    double sum_mse = 0.0;
    double sum_rate = std::numeric_limits<double>::quiet_NaN(); // bits/s/Hz, filled by sum_rate()
    std::size_t tau = 0;
    double snr = 0.0; // linear
    Algorithm algorithm = Algorithm::ncc;
    std::uint64_t seed = 0;
};

namespace detail
{

inline void check_evaluation_inputs(const PilotAssignment &a, std::size_t K, double zeta, std::size_t tau)
{
    if (!(zeta > 0.0))
        throw std::domain_error("evaluation: snr must be positive");
    if (tau < 1)
        throw std::domain_error("evaluation: tau must be >= 1");
    if (!satisfies_constraints(a, K))
        throw std::domain_error("evaluation: pilot assignment does not partition the UT set");
}

// Psi = sum_{l in group} Phi_l + noise_var I
inline CMatrix group_covariance(const std::vector<std::size_t> &group, const std::vector<CMatrix> &cov,
                                double noise_var, Eigen::Index M)
{
    CMatrix psi = noise_var * CMatrix::Identity(M, M);
    for (auto l : group)
        psi += cov.at(l);
    return psi;
}

inline Eigen::LLT<CMatrix> factor_group(const CMatrix &psi)
{
    Eigen::LLT<CMatrix> llt(psi);
    if (llt.info() != Eigen::Success)
    {
        const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(psi, Eigen::EigenvaluesOnly).eigenvalues();
        std::ostringstream os;
        os << "evaluation: pilot covariance is numerically singular (eigenvalues in [" << ev.minCoeff() << ", "
           << ev.maxCoeff() << "], condition " << ev.maxCoeff() / std::abs(ev.minCoeff()) << ")";
        throw std::runtime_error(os.str());
    }
    return llt;
}

} // namespace detail

// epsilon_k = tr(Phi_k - Phi_k Psi_t^{-1} Phi_k) with Psi_t = sum_{l in P_t} Phi_l + I/(zeta tau),
// the sum including UT k itself. Evaluated as tr(Phi_k Psi_t^{-1} (Psi_t - Phi_k)) to avoid
// cancellation.
inline EvaluationResult closed_form_mse(const PilotAssignment &assignment, const std::vector<CMatrix> &covariances,
                                        double zeta, std::size_t tau)
{
    const std::size_t K = covariances.size();
    detail::check_evaluation_inputs(assignment, K, zeta, tau);
    const Eigen::Index M = K ? covariances.front().rows() : 0;
    const double noise_var = 1.0 / (zeta * static_cast<double>(tau));

    EvaluationResult r;
    r.mse.assign(K, 0.0);
    r.tau = tau;
    r.snr = zeta;
    r.algorithm = assignment.algorithm;
    for (const auto &group : assignment.groups)
    {
        const CMatrix psi = detail::group_covariance(group, covariances, noise_var, M);
        const auto llt = detail::factor_group(psi);
        for (auto k : group)
        {
            const CMatrix x = llt.solve(psi - covariances[k]);
            r.mse[k] = std::max(0.0, x.cwiseProduct(covariances[k].transpose()).sum().real());
        }
    }
    for (double e : r.mse)
        r.sum_mse += e;
    return r;
}

// Linear MMSE pilot-stage quantities for a fixed assignment.
struct MmseStage
{
    std::vector<CMatrix> filters;          // Phi_k Psi_t^{-1}
    std::vector<CMatrix> error_covariance; // Phi_k - Phi_k Psi_t^{-1} Phi_k
    double noise_var = 0.0;                // 1 / (zeta tau)
};

inline MmseStage build_mmse_stage(const PilotAssignment &assignment, const std::vector<CMatrix> &covariances,
                                  double zeta, std::size_t tau)
{
    const std::size_t K = covariances.size();
    detail::check_evaluation_inputs(assignment, K, zeta, tau);
    const Eigen::Index M = K ? covariances.front().rows() : 0;
    MmseStage st;
    st.noise_var = 1.0 / (zeta * static_cast<double>(tau));
    st.filters.resize(K);
    st.error_covariance.resize(K);
    for (const auto &group : assignment.groups)
    {
        const auto llt = detail::factor_group(detail::group_covariance(group, covariances, st.noise_var, M));
        for (auto k : group)
        {
            st.filters[k] = llt.solve(covariances[k]).adjoint(); // (Psi^{-1} Phi)^H = Phi Psi^{-1}
            CMatrix c = covariances[k] - st.filters[k] * covariances[k];
            st.error_covariance[k] = (c + c.adjoint()) / 2.0;
        }
    }
    return st;
}

namespace detail
{

// One channel per UT, resampled from the stored draws with a uniform random phase.
// The resulting law is zero-mean with second moment equal to the sample covariance.
inline CMatrix resample_channels(const ChannelSet &channels, Rng &rng)
{
    const std::size_t K = channels.num_uts();
    CMatrix h(static_cast<Eigen::Index>(channels.num_antennas()), static_cast<Eigen::Index>(K));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    for (std::size_t k = 0; k < K; ++k)
    {
        const auto &d = channels.draws[k];
        if (d.cols() == 0)
            throw std::domain_error("evaluation: UT " + std::to_string(k) + " has no channel draws");
        std::uniform_int_distribution<Eigen::Index> pick(0, d.cols() - 1);
        const Eigen::Index n = pick(rng);
        h.col(static_cast<Eigen::Index>(k)) = std::polar(1.0, phase(rng)) * d.col(n);
    }
    return h;
}

// MMSE estimates of every UT channel from simulated pilot observations
// y_t = sum_{l in P_t} h_l + n, n ~ CN(0, noise_var I).
inline CMatrix estimate_channels(const PilotAssignment &a, const MmseStage &st, const CMatrix &h, Rng &rng)
{
    const Eigen::Index M = h.rows();
    CMatrix est(M, h.cols());
    CVector y(M);
    for (const auto &group : a.groups)
    {
        for (Eigen::Index i = 0; i < M; ++i)
            y[i] = complex_gaussian(rng, st.noise_var);
        for (auto l : group)
            y += h.col(static_cast<Eigen::Index>(l));
        for (auto k : group)
            est.col(static_cast<Eigen::Index>(k)) = st.filters[k] * y;
    }
    return est;
}

} // namespace detail

// Empirical per-UT MSE of the MMSE estimator over `num_trials` simulated pilot phases.
inline std::vector<double> monte_carlo_mse_oracle(const PilotAssignment &assignment, const ChannelSet &channels,
                                                  double zeta, std::size_t tau, std::size_t num_trials, Rng &rng)
{
    if (num_trials < 1)
        throw std::domain_error("monte_carlo_mse_oracle: num_trials must be >= 1");
    const MmseStage st = build_mmse_stage(assignment, channels.covariances, zeta, tau);
    std::vector<double> acc(channels.num_uts(), 0.0);
    for (std::size_t trial = 0; trial < num_trials; ++trial)
    {
        const CMatrix h = detail::resample_channels(channels, rng);
        const CMatrix est = detail::estimate_channels(assignment, st, h, rng);
        for (std::size_t k = 0; k < acc.size(); ++k)
            acc[k] += (est.col(static_cast<Eigen::Index>(k)) - h.col(static_cast<Eigen::Index>(k))).squaredNorm();
    }
    for (auto &v : acc)
        v /= static_cast<double>(num_trials);
    return acc;
}

// SINR_k = h_k^H (sum_{l != k} h_l h_l^H + C + I/zeta)^{-1} h_k for the estimates in the
// columns of `estimates`, with C the summed estimation-error covariance.
inline std::vector<double> uplink_sinr(const CMatrix &estimates, const CMatrix &error_covariance_sum, double zeta)
{
    const Eigen::Index M = estimates.rows();
    CMatrix a = error_covariance_sum + CMatrix::Identity(M, M) / zeta;
    a += estimates * estimates.adjoint();
    const Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("uplink_sinr: receiver covariance not positive definite");
    const CMatrix x = llt.solve(estimates);
    std::vector<double> sinr(static_cast<std::size_t>(estimates.cols()));
    for (Eigen::Index k = 0; k < estimates.cols(); ++k)
    {
        // Sherman-Morrison: removing UT k's own term from the full covariance
        const double q = std::clamp(estimates.col(k).dot(x.col(k)).real(), 0.0, 1.0);
        sinr[static_cast<std::size_t>(k)] = q < 1.0 ? q / (1.0 - q) : std::numeric_limits<double>::infinity();
    }
    return sinr;
}

// Average over trials of sum_k log2(1 + SINR_k) with MMSE-estimated channels and a receiver
// that treats the estimation error as extra noise.
inline double sum_rate(const PilotAssignment &assignment, const ChannelSet &channels, double zeta, std::size_t tau,
                       std::size_t num_trials, Rng &rng)
{
    if (num_trials < 1)
        throw std::domain_error("sum_rate: num_trials must be >= 1");
    const MmseStage st = build_mmse_stage(assignment, channels.covariances, zeta, tau);
    const auto M = static_cast<Eigen::Index>(channels.num_antennas());
    CMatrix c_sum = CMatrix::Zero(M, M);
    for (const auto &c : st.error_covariance)
        c_sum += c;

    double total = 0.0;
    for (std::size_t trial = 0; trial < num_trials; ++trial)
    {
        const CMatrix h = detail::resample_channels(channels, rng);
        const CMatrix est = detail::estimate_channels(assignment, st, h, rng);
        for (double s : uplink_sinr(est, c_sum, zeta))
            total += std::log2(1.0 + s);
    }
    return total / static_cast<double>(num_trials);
}

} // namespace nfcc

#endif
