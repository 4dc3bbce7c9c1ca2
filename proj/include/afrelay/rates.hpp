// SPDX-License-Identifier: Apache-2.0
//
// afrelay - block Markov amplify-and-forward relaying toolkit
// Copyright (C) 2026 The afrelay authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "afrelay/channel.hpp"

namespace afrelay {

/// Mean and standard error of a Monte Carlo quantity.
struct Estimate
{
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct RateResult
{
    std::vector<double> rate_bits;  ///< per pair
    std::vector<double> stderr_bits;
    std::int64_t samples = 0;
    std::int64_t rejected = 0;
    double power = 0.0;
    std::string scheme;

    double sum() const;
    Estimate pair(int i) const { return {rate_bits.at(i), stderr_bits.at(i)}; }
};

/// Per-pair two-hop integrand log2(1 + g^2 c^2 P / (1 + g^2 c^2 ||row_i(H^{-1})||^2)) for one H.
std::vector<double> two_hop_integrand(const ChannelDistribution& dist, const CMatrix& h, double power);

/// Per-pair three-hop integrand for one H in the distinct-eigenvalue set.
std::vector<double> three_hop_integrand(const ChannelDistribution& dist, const CMatrix& h, double power);

/// Monte Carlo expectation of the two-hop integrand. Trial t draws H from
/// Rng(derive_seed(seed, t)), so equal seeds give common random numbers across P.
RateResult rate_two_hop_mc(const ChannelDistribution& dist, int k, double power, std::int64_t samples,
                           std::uint64_t seed);

RateResult rate_three_hop_mc(const ChannelDistribution& dist, int k, double power, std::int64_t samples,
                             std::uint64_t seed);

/// Optimal powers p_i >= 0, sum p_i = total_power, maximizing sum log(1 + p_i g_i).
std::vector<double> waterfill(const std::vector<double>& gains, double total_power);

/// sum log2(1 + p_i g_i) at the water-filling allocation.
double waterfill_capacity(const std::vector<double>& gains, double total_power);

/// max over tr(Sigma) <= k_tx of log2 det(I + P H Sigma H^dagger) for one H.
double cutset_capacity(const CMatrix& h, double power);

/// Source-cut sum-rate upper bound averaged over k_rx x k_tx channels.
/// The single entry of `rate_bits` holds the sum rate.
RateResult cutset_sum_upper(const ChannelDistribution& dist, int k_tx, int k_rx, double power,
                            std::int64_t samples, std::uint64_t seed);

struct SweepRow
{
    double snr_db = 0.0;
    int k = 0;
    int m = 2;
    std::string scheme;
    double achievable_sum = 0.0;
    double cutset_sum = 0.0;
    double gap = 0.0;
    double stderr_gap = 0.0;  ///< paired standard error of the gap
    double stderr_achievable = 0.0;
    double stderr_cutset = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Achievable sum rate of the AF scheme (M = 2 or 3) against the cut-set
/// bound, one row per SNR, the same channel draws at every SNR.
std::vector<SweepRow> gap_table(const ChannelDistribution& dist, int k, int m,
                                const std::vector<double>& snr_db_list, std::int64_t samples,
                                std::uint64_t seed);

struct SlopeEstimate
{
    double slope = 0.0;
    double stderr_ = 0.0;
};

/// (R(P_hi) - R(P_lo)) / (log2 P_hi - log2 P_lo). The error propagation
/// treats the two estimates as independent.
SlopeEstimate dof_slope(const std::function<Estimate(double)>& rate_fn, double p_lo, double p_hi);

/// Splits M hops into segments of 2, with a single trailing 3 when M is odd.
std::vector<int> hop_decompose(int m);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string scheme_label(int m);

} // namespace afrelay
