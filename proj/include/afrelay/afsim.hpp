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

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "afrelay/channel.hpp"
#include "afrelay/pairing.hpp"

namespace afrelay {

/// Where hop matrices come from. The default draws i.i.d. from the
/// configured distribution; tests inject deterministic sequences.
class ChannelSource
{
  public:
    virtual ~ChannelSource() = default;
    /// Matrix of hop `hop` (1-based) at time `t` (1-based).
    virtual CMatrix draw(int hop, std::int64_t t, int rows, int cols, Rng& rng) const = 0;
};

class IidChannelSource final : public ChannelSource
{
  public:
    explicit IidChannelSource(ChannelDistribution dist) : dist_(std::move(dist)) {}
    CMatrix draw(int hop, std::int64_t t, int rows, int cols, Rng& rng) const override;

  private:
    ChannelDistribution dist_;
};

/// Periodic deterministic channel: hop m at time t is `pattern[m-1][(t-1) % period]`.
class PeriodicChannelSource final : public ChannelSource
{
  public:
    explicit PeriodicChannelSource(std::vector<std::vector<CMatrix>> pattern);
    CMatrix draw(int hop, std::int64_t t, int rows, int cols, Rng& rng) const override;

  private:
    std::vector<std::vector<CMatrix>> pattern_;
};

/// Empirical first-hop cell law estimated from a calibration pass.
struct CellCalibration
{
    QuantizerSpec quantizer;
    std::int64_t samples = 0;
    std::int64_t out_of_range = 0;
    std::unordered_map<CellIndex, std::int64_t, CellIndexHash> counts;

    double probability(const CellIndex& cell) const;
    std::size_t observed_cells() const noexcept { return counts.size(); }
};

struct SimConfig
{
    Topology topology;
    ChannelDistribution dist = ChannelDistribution::complex_gaussian();
    double power = 1.0;            ///< P, per node
    std::int64_t n_b = 1000;       ///< sub-block length
    std::int64_t sub_blocks = 3;   ///< B
    QuantizerSpec quantizer;
    double epsilon = 0.01;
    std::uint64_t seed = 1;
    /// Draw x and z explicitly to measure relay transmit power.
    bool sample_noise = false;
    /// Calibration sample count; 0 selects max(10^6, 100 n_B).
    std::int64_t calibration_samples = 0;
    /// Optional precomputed calibration shared between replicas.
    std::shared_ptr<const CellCalibration> calibration;
    /// Optional channel source; i.i.d. draws from `dist` when null.
    std::shared_ptr<const ChannelSource> source;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    int k() const { return topology.layer_sizes.empty() ? 0 : topology.layer_sizes.front(); }
    std::int64_t effective_sub_blocks() const { return sub_blocks - (topology.hops - 1); }
};

/// Time-index sets of one hop inside one sub-block.
struct TimeIndexSets
{
    int hop = 1;
    std::int64_t sub_block = 1;
    std::unordered_map<CellIndex, std::vector<std::int64_t>, CellIndexHash> slots;
    std::int64_t out_of_range = 0;
    std::int64_t rejected = 0;
};

/// Per-cell quotas N(cell) = floor(n_B (Pr(cell) - epsilon)), positive entries only.
struct ScheduleTables
{
    std::unordered_map<CellIndex, std::int64_t, CellIndexHash> quota;
    std::vector<TimeIndexSets> sets;
};

/// Slot bookkeeping for one hop, summed over sub-blocks.
struct SlotTally
{
    std::int64_t transmitted = 0;
    std::int64_t unmet_quota = 0;
    std::int64_t unused = 0;
    std::int64_t out_of_range = 0;

    std::int64_t total() const noexcept { return transmitted + unmet_quota + unused + out_of_range; }
};

struct SimReport
{
    int k = 0;
    int hops = 2;
    std::uint64_t seed = 0;
    std::int64_t effective_sub_blocks = 0;
    std::vector<double> rate_bits;          ///< per pair, per effective sub-block
    std::vector<double> mean_sinr;          ///< per pair, linear, over transmitted slots
    std::vector<double> mean_interference;  ///< per pair, interference power over transmitted slots
    double max_interference = 0.0;
    std::int64_t e1 = 0;                    ///< sub-blocks with an encoding error
    std::int64_t e2 = 0;                    ///< sub-blocks with a relaying error
    double utilization = 0.0;               ///< transmitted first-hop slots / effective first-hop slots
    double out_of_range_fraction = 0.0;
    std::int64_t rejected = 0;
    std::int64_t transmitted_slots = 0;
    std::int64_t positive_quota_cells = 0;
    std::int64_t observed_cells = 0;        ///< distinct first-hop cells seen in calibration
    double relay_power_ratio = 0.0;         ///< max relay empirical power / P (sample_noise only)
    double source_power_ratio = 0.0;
    std::vector<SlotTally> slots;           ///< per hop over all B sub-blocks
};

struct ScalingDefaults
{
    double delta = 0.0;
    int q = 0;
    double epsilon = 0.0;
};

/// delta = n_B^{-1/(24k^2)}, q = ceil(n_B^{1/(12k^2)}), epsilon = n_B^{-1/3}.
ScalingDefaults default_scaling(std::int64_t n_b, int k);

/// Relay gain sqrt(P / (1 + max_i ||row_i(H1)||^2 P)).
double gamma_two_hop(const CMatrix& h1, double power);

struct GammaPair
{
    double gamma1 = 0.0;
    double gamma2 = 0.0;
};

GammaPair gammas_three_hop(const CMatrix& h1, const CMatrix& h2, double power);

/// SINR at destination `pair` (0-based) when the second hop is F(H) + Delta.
double sinr_two_hop(const ChannelDistribution& dist, const CMatrix& h, const CMatrix& delta, double power,
                    int pair);

/// SINR at destination `pair` when the later hops are F1(H) + Delta1 and F2(H) + Delta2.
double sinr_three_hop(const ChannelDistribution& dist, const CMatrix& h, const CMatrix& delta1,
                      const CMatrix& delta2, double power, int pair);

struct CascadeSinr
{
    std::vector<double> sinr;
    std::vector<double> interference;  ///< interference power per destination
};

/// SINR from realized hop matrices of a two-hop cascade (relay gain from h1).
CascadeSinr cascade_sinr_two_hop(const CMatrix& h1, const CMatrix& h2, double power);

/// SINR from realized hop matrices of a three-hop cascade.
CascadeSinr cascade_sinr_three_hop(const CMatrix& h1, const CMatrix& h2, const CMatrix& h3, double power);

/// First-hop cell frequencies from `samples` draws of hop 1.
CellCalibration calibrate(const SimConfig& config, std::int64_t samples, std::uint64_t seed);

/// Quotas from a calibration: only cells with a positive quota are listed.
std::unordered_map<CellIndex, std::int64_t, CellIndexHash> compute_quotas(const CellCalibration& cal,
                                                                          std::int64_t n_b, double epsilon);

/// Cell time-index sets of one hop within one sub-block. Hop 1 cells come from
/// quantizing H; two-hop second-hop cells from quantizing F(G) (involution);
/// three-hop later hops are keyed by quantizing G directly.
TimeIndexSets collect_time_sets(const SimConfig& config, int hop, std::int64_t sub_block,
                                const std::vector<CMatrix>& channels);

/// Runs the block Markov scheme for M = 2 or 3.
SimReport run_block_sim(const SimConfig& config);

/// Runs one replica per seed (config.seed is replaced), `threads` at a time.
/// Results are returned in seed order.
std::vector<SimReport> run_replicas(const SimConfig& config, const std::vector<std::uint64_t>& seeds,
                                    unsigned threads = 0);

struct ErrorEventStats
{
    double p_e1 = 0.0;
    double p_e2 = 0.0;
    double bound = 0.0;  ///< observed_cells / (4 n_B epsilon^2)
};

ErrorEventStats error_event_stats(const SimReport& report, const SimConfig& config);

} // namespace afrelay
