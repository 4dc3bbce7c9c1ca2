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

#include "afrelay/afsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace afrelay {

namespace {

double max_row_norm2(const CMatrix& m)
{
    return m.rowwise().squaredNorm().maxCoeff();
}

double log2_1p(double x)
{
    return std::log1p(x) / std::numbers::ln2;
}

using QuotaList = std::vector<std::pair<CellIndex, std::int64_t>>;

QuotaList sorted_quotas(const std::unordered_map<CellIndex, std::int64_t, CellIndexHash>& quotas)
{
    QuotaList list(quotas.begin(), quotas.end());
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return list;
}

/// One sub-block's worth of one hop.
struct HopBlock
{
    std::vector<CMatrix> channels;
    TimeIndexSets sets;
};

/// Running sums over transmitted slots.
class Accumulator
{
  public:
    Accumulator(int k, bool sample_noise, double power, std::uint64_t noise_seed)
        : log_sum_(k, 0.0), sinr_sum_(k, 0.0), interference_sum_(k, 0.0), sample_noise_(sample_noise),
          power_(power), rng_(noise_seed), normal_(0.0, std::numbers::sqrt2 / 2.0)
    {
    }

    void add(const CascadeSinr& s)
    {
        for (std::size_t i = 0; i < s.sinr.size(); ++i) {
            log_sum_[i] += log2_1p(s.sinr[i]);
            sinr_sum_[i] += s.sinr[i];
            interference_sum_[i] += s.interference[i];
            max_interference_ = std::max(max_interference_, s.interference[i]);
        }
        ++slots_;
    }

    /// Propagates one random symbol vector through the relays and records transmit powers.
    void probe_power(const std::vector<const CMatrix*>& hops, const std::vector<double>& gains)
    {
        if (!sample_noise_)
            return;
        const Eigen::Index k = hops.front()->cols();
        CVector x(k);
        for (Eigen::Index i = 0; i < k; ++i)
            x(i) = std::sqrt(power_) * draw();
        record(source_power_, x);
        for (std::size_t m = 0; m + 1 < hops.size(); ++m) {
            CVector z(hops[m]->rows());
            for (Eigen::Index i = 0; i < z.size(); ++i)
                z(i) = draw();
            x = gains[m] * ((*hops[m]) * x + z);
            if (relay_power_.size() <= m)
                relay_power_.emplace_back();
            record(relay_power_[m], x);
        }
        ++probes_;
    }

    void fill(SimReport& report, std::int64_t n_b, std::int64_t effective) const
    {
        const double denom = static_cast<double>(n_b) * static_cast<double>(effective);
        const auto k = log_sum_.size();
        report.rate_bits.assign(k, 0.0);
        report.mean_sinr.assign(k, 0.0);
        report.mean_interference.assign(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            report.rate_bits[i] = denom > 0 ? log_sum_[i] / denom : 0.0;
            if (slots_ > 0) {
                report.mean_sinr[i] = sinr_sum_[i] / static_cast<double>(slots_);
                report.mean_interference[i] = interference_sum_[i] / static_cast<double>(slots_);
            }
        }
        report.max_interference = max_interference_;
        report.transmitted_slots = slots_;
        if (probes_ > 0) {
            report.source_power_ratio = ratio(source_power_);
            double worst = 0.0;
            for (const auto& layer : relay_power_)
                worst = std::max(worst, ratio(layer));
            report.relay_power_ratio = worst;
        }
    }

  private:
    Complex draw()
    {
        const double re = normal_(rng_);
        const double im = normal_(rng_);
        return {re, im};
    }

    static void record(std::vector<double>& acc, const CVector& x)
    {
        if (acc.size() < static_cast<std::size_t>(x.size()))
            acc.resize(static_cast<std::size_t>(x.size()), 0.0);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            acc[static_cast<std::size_t>(i)] += std::norm(x(i));
    }

    double ratio(const std::vector<double>& acc) const
    {
        double worst = 0.0;
        for (double a : acc)
            worst = std::max(worst, a / static_cast<double>(probes_) / power_);
        return worst;
    }

    std::vector<double> log_sum_;
    std::vector<double> sinr_sum_;
    std::vector<double> interference_sum_;
    double max_interference_ = 0.0;
    std::int64_t slots_ = 0;

    bool sample_noise_;
    double power_;
    Rng rng_;
    std::normal_distribution<double> normal_;
    std::vector<double> source_power_;
    std::vector<std::vector<double>> relay_power_;
    std::int64_t probes_ = 0;
};

} // namespace

// ---- channel sources ----------------------------------------------------

CMatrix IidChannelSource::draw(int, std::int64_t, int rows, int cols, Rng& rng) const
{
    return sample_hop_matrix(dist_, rows, cols, rng);
}

PeriodicChannelSource::PeriodicChannelSource(std::vector<std::vector<CMatrix>> pattern) : pattern_(std::move(pattern))
{
    if (pattern_.empty())
        throw PreconditionError("PeriodicChannelSource: empty pattern");
    for (const auto& hop : pattern_)
        if (hop.empty())
            throw PreconditionError("PeriodicChannelSource: every hop needs at least one matrix");
}

CMatrix PeriodicChannelSource::draw(int hop, std::int64_t t, int rows, int cols, Rng&) const
{
    const auto& seq = pattern_.at(static_cast<std::size_t>(hop - 1));
    const CMatrix& h = seq[static_cast<std::size_t>((t - 1) % static_cast<std::int64_t>(seq.size()))];
    if (h.rows() != rows || h.cols() != cols)
        throw PreconditionError("PeriodicChannelSource: pattern matrix has the wrong shape");
    return h;
}

// ---- calibration and configuration --------------------------------------

double CellCalibration::probability(const CellIndex& cell) const
{
    const auto it = counts.find(cell);
    if (it == counts.end() || samples == 0)
        return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(samples);
}

void SimConfig::validate() const
{
    topology.validate();
    if (topology.hops != 2 && topology.hops != 3)
        throw ConfigError("m", "the simulator handles M = 2 or M = 3");
    if (!topology.is_uniform() || !topology.single_antenna())
        throw ConfigError("layers", "the simulator needs K nodes with one antenna in every layer");
    if (!(power > 0.0) || !std::isfinite(power))
        throw ConfigError("P", "power must be positive");
    if (n_b < 1)
        throw ConfigError("n_b", "sub-block length must be >= 1");
    const std::int64_t min_blocks = topology.hops;
    if (sub_blocks < min_blocks)
        throw ConfigError("B", "sub-block count must be >= " + std::to_string(min_blocks) + " for M=" +
                                   std::to_string(topology.hops));
    quantizer.validate();
    if (quantizer.k != k())
        throw ConfigError("k", "quantizer dimension must equal the number of pairs");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("epsilon", "must lie in (0, 1)");
    if (calibration_samples < 0)
        throw ConfigError("calibration_samples", "must be >= 0");
    if (calibration && !(calibration->quantizer.delta == quantizer.delta && calibration->quantizer.q == quantizer.q &&
                         calibration->quantizer.k == quantizer.k))
        throw ConfigError("calibration", "calibration was computed for a different quantizer");
}

ScalingDefaults default_scaling(std::int64_t n_b, int k)
{
    if (n_b < 2 || k < 1)
        throw PreconditionError("default_scaling: need n_B >= 2 and k >= 1");
    const double ln = std::log(static_cast<double>(n_b));
    const double k2 = static_cast<double>(k) * k;
    ScalingDefaults s;
    s.delta = std::exp(-ln / (24.0 * k2));
    const double q_real = std::exp(ln / (12.0 * k2));
    const double nearest = std::round(q_real);
    // exact powers (e.g. n_B = 2^24, k = 1) must not round up through ulp noise
    s.q = static_cast<int>(std::abs(q_real - nearest) < 1e-9 * nearest ? nearest : std::ceil(q_real));
    s.epsilon = std::exp(-ln / 3.0);
    return s;
}

double gamma_two_hop(const CMatrix& h1, double power)
{
    if (!(power > 0.0))
        throw PreconditionError("gamma_two_hop: power must be positive");
    return std::sqrt(power / (1.0 + max_row_norm2(h1) * power));
}

GammaPair gammas_three_hop(const CMatrix& h1, const CMatrix& h2, double power)
{
    GammaPair g;
    g.gamma1 = gamma_two_hop(h1, power);
    const CMatrix h21 = h2 * h1;
    const Eigen::VectorXd load = h2.rowwise().squaredNorm() + h21.rowwise().squaredNorm() * power;
    g.gamma2 = std::sqrt(power / (1.0 + g.gamma1 * g.gamma1 * load.maxCoeff()));
    return g;
}

double sinr_two_hop(const ChannelDistribution& dist, const CMatrix& h, const CMatrix& delta, double power, int pair)
{
    if (delta.rows() != h.rows() || delta.cols() != h.cols())
        throw PreconditionError("sinr_two_hop: Delta shape mismatch");
    if (pair < 0 || pair >= h.rows())
        throw PreconditionError("sinr_two_hop: pair index out of range");
    const PairingMap map = map_two_hop(dist, h);
    const double c = map.scales[0];
    const double g2 = std::pow(gamma_two_hop(h, power), 2);
    const CMatrix dh = delta * h;
    const Eigen::Index i = pair;

    const double signal = g2 * std::norm(c + dh(i, i)) * power;
    double interference = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        if (j != i)
            interference += std::norm(dh(i, j));
    interference *= g2 * power;
    const double noise = 1.0 + g2 * (map.target() + delta).row(i).squaredNorm();
    return signal / (interference + noise);
}

double sinr_three_hop(const ChannelDistribution& dist, const CMatrix& h, const CMatrix& delta1, const CMatrix& delta2,
                      double power, int pair)
{
    if (delta1.rows() != h.rows() || delta1.cols() != h.cols() || delta2.rows() != h.rows() ||
        delta2.cols() != h.cols())
        throw PreconditionError("sinr_three_hop: Delta shape mismatch");
    if (pair < 0 || pair >= h.rows())
        throw PreconditionError("sinr_three_hop: pair index out of range");
    const PairingMap map = map_three_hop(dist, h);
    const CMatrix& f1 = map.targets[0];
    const CMatrix& f2 = map.targets[1];
    const double c12 = map.scales[0] * map.scales[1];
    const CMatrix h2 = f1 + delta1;
    const CMatrix h3 = f2 + delta2;
    const GammaPair g = gammas_three_hop(h, h2, power);
    const double g1 = g.gamma1 * g.gamma1;
    const double g2 = g.gamma2 * g.gamma2;

    const CMatrix total = f2 * delta1 * h + delta2 * f1 * h + delta2 * delta1 * h;
    const Eigen::Index i = pair;
    const double signal = g2 * g1 * std::norm(c12 + total(i, i)) * power;
    double interference = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        if (j != i)
            interference += std::norm(total(i, j));
    interference *= g2 * g1 * power;
    const double noise = 1.0 + g2 * h3.row(i).squaredNorm() + g2 * g1 * (h3 * h2).row(i).squaredNorm();
    return signal / (interference + noise);
}

CascadeSinr cascade_sinr_two_hop(const CMatrix& h1, const CMatrix& h2, double power)
{
    const double g2 = std::pow(gamma_two_hop(h1, power), 2);
    const CMatrix e = h2 * h1;
    const Eigen::Index k = e.rows();
    CascadeSinr out;
    out.sinr.resize(static_cast<std::size_t>(k));
    out.interference.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        double leak = 0.0;
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            if (j != i)
                leak += std::norm(e(i, j));
        const double interference = g2 * leak * power;
        const double noise = 1.0 + g2 * h2.row(i).squaredNorm();
        out.sinr[static_cast<std::size_t>(i)] = g2 * std::norm(e(i, i)) * power / (interference + noise);
        out.interference[static_cast<std::size_t>(i)] = interference;
    }
    return out;
}

CascadeSinr cascade_sinr_three_hop(const CMatrix& h1, const CMatrix& h2, const CMatrix& h3, double power)
{
    const GammaPair g = gammas_three_hop(h1, h2, power);
    const double g1 = g.gamma1 * g.gamma1;
    const double g2 = g.gamma2 * g.gamma2;
    const CMatrix h32 = h3 * h2;
    const CMatrix e = h32 * h1;
    const Eigen::Index k = e.rows();
    CascadeSinr out;
    out.sinr.resize(static_cast<std::size_t>(k));
    out.interference.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        double leak = 0.0;
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            if (j != i)
                leak += std::norm(e(i, j));
        const double interference = g2 * g1 * leak * power;
        const double noise = 1.0 + g2 * h3.row(i).squaredNorm() + g2 * g1 * h32.row(i).squaredNorm();
        out.sinr[static_cast<std::size_t>(i)] = g2 * g1 * std::norm(e(i, i)) * power / (interference + noise);
        out.interference[static_cast<std::size_t>(i)] = interference;
    }
    return out;
}

CellCalibration calibrate(const SimConfig& config, std::int64_t samples, std::uint64_t seed)
{
    if (samples < 1)
        throw PreconditionError("calibrate: need at least one sample");
    const int k = config.k();
    const auto source = config.source ? config.source : std::make_shared<IidChannelSource>(config.dist);
    CellCalibration cal;
    cal.quantizer = config.quantizer;
    cal.samples = samples;
    Rng rng(seed);
    for (std::int64_t t = 1; t <= samples; ++t) {
        const auto cell = quantize(source->draw(1, t, k, k, rng), config.quantizer);
        if (cell)
            ++cal.counts[*cell];
        else
            ++cal.out_of_range;
    }
    return cal;
}

std::unordered_map<CellIndex, std::int64_t, CellIndexHash> compute_quotas(const CellCalibration& cal,
                                                                          std::int64_t n_b, double epsilon)
{
    std::unordered_map<CellIndex, std::int64_t, CellIndexHash> quotas;
    for (const auto& [cell, count] : cal.counts) {
        const double p = static_cast<double>(count) / static_cast<double>(cal.samples);
        const auto n = static_cast<std::int64_t>(std::floor(static_cast<double>(n_b) * (p - epsilon)));
        if (n > 0)
            quotas.emplace(cell, n);
    }
    return quotas;
}

TimeIndexSets collect_time_sets(const SimConfig& config, int hop, std::int64_t sub_block,
                                const std::vector<CMatrix>& channels)
{
    TimeIndexSets sets;
    sets.hop = hop;
    sets.sub_block = sub_block;
    const std::int64_t first = (sub_block - 1) * config.n_b + 1;
    const bool involution = config.topology.hops == 2 && hop == 2;
    for (std::size_t r = 0; r < channels.size(); ++r) {
        const CMatrix& h = channels[r];
        std::optional<CellIndex> cell;
        if (hop == 1 || involution) {
            if (!is_full_rank(h)) {
                ++sets.rejected;
                ++sets.out_of_range;
                continue;
            }
        }
        cell = involution ? quantize(map_two_hop(config.dist, h).target(), config.quantizer)
                          : quantize(h, config.quantizer);
        if (!cell) {
            ++sets.out_of_range;
            continue;
        }
        sets.slots[*cell].push_back(first + static_cast<std::int64_t>(r));
    }
    return sets;
}

// ---- simulator ----------------------------------------------------------

namespace {

class BlockSimulator
{
  public:
    explicit BlockSimulator(const SimConfig& config)
        : config_(config), k_(config.k()), hops_(config.topology.hops),
          source_(config.source ? config.source : std::make_shared<IidChannelSource>(config.dist)),
          acc_(config.k(), config.sample_noise, config.power, derive_seed(config.seed, 100))
    {
        for (int m = 0; m < hops_; ++m)
            hop_rng_.emplace_back(derive_seed(config.seed, static_cast<std::uint64_t>(m + 1)));
        report_.slots.assign(static_cast<std::size_t>(hops_), SlotTally{});
    }

    SimReport run()
    {
        std::shared_ptr<const CellCalibration> cal = config_.calibration;
        if (!cal) {
            const std::int64_t n_cal = config_.calibration_samples > 0
                                           ? config_.calibration_samples
                                           : std::max<std::int64_t>(1'000'000, 100 * config_.n_b);
            cal = std::make_shared<CellCalibration>(calibrate(config_, n_cal, derive_seed(config_.seed, 0xCA1)));
        }
        quotas_ = sorted_quotas(compute_quotas(*cal, config_.n_b, config_.epsilon));

        // window[m] holds the hop-m block of sub-blocks b-hops+1 .. b
        std::vector<std::vector<HopBlock>> window(static_cast<std::size_t>(hops_));
        for (std::int64_t b = 1; b <= config_.sub_blocks; ++b) {
            for (int m = 1; m <= hops_; ++m) {
                auto& w = window[static_cast<std::size_t>(m - 1)];
                w.push_back(draw_block(m, b));
                if (w.size() > static_cast<std::size_t>(hops_))
                    w.erase(w.begin());
            }
            if (b >= hops_) {
                // effective sub-block b - hops + 1 uses hop m from sub-block (b - hops + m)
                std::vector<HopBlock*> chain;
                for (int m = 1; m <= hops_; ++m) {
                    auto& w = window[static_cast<std::size_t>(m - 1)];
                    chain.push_back(&w[w.size() - 1 - static_cast<std::size_t>(hops_ - m)]);
                }
                if (hops_ == 2)
                    process_two_hop(*chain[0], *chain[1]);
                else
                    process_three_hop(*chain[0], *chain[1], *chain[2]);
            }
        }
        // hop-m slots of sub-blocks outside any effective sub-block idle
        for (int m = 1; m <= hops_; ++m) {
            auto& tally = report_.slots[static_cast<std::size_t>(m - 1)];
            tally.unused = static_cast<std::int64_t>(config_.n_b) * config_.sub_blocks - tally.transmitted -
                           tally.unmet_quota - tally.out_of_range;
        }

        const std::int64_t effective = config_.effective_sub_blocks();
        report_.k = k_;
        report_.hops = hops_;
        report_.seed = config_.seed;
        report_.effective_sub_blocks = effective;
        report_.positive_quota_cells = static_cast<std::int64_t>(quotas_.size());
        report_.observed_cells = static_cast<std::int64_t>(cal->observed_cells());
        acc_.fill(report_, config_.n_b, effective);
        report_.utilization = static_cast<double>(report_.slots[0].transmitted) /
                              (static_cast<double>(config_.n_b) * static_cast<double>(effective));
        std::int64_t oor = 0;
        for (const auto& t : report_.slots)
            oor += t.out_of_range;
        report_.out_of_range_fraction =
            static_cast<double>(oor) / (static_cast<double>(config_.n_b) * config_.sub_blocks * hops_);
        return report_;
    }

  private:
    HopBlock draw_block(int hop, std::int64_t b)
    {
        HopBlock block;
        block.channels.reserve(static_cast<std::size_t>(config_.n_b));
        Rng& rng = hop_rng_[static_cast<std::size_t>(hop - 1)];
        const std::int64_t first = (b - 1) * config_.n_b + 1;
        for (std::int64_t r = 0; r < config_.n_b; ++r)
            block.channels.push_back(source_->draw(hop, first + r, k_, k_, rng));
        block.sets = collect_time_sets(config_, hop, b, block.channels);
        auto& tally = report_.slots[static_cast<std::size_t>(hop - 1)];
        tally.out_of_range += block.sets.out_of_range;
        report_.rejected += block.sets.rejected;
        return block;
    }

    const CMatrix& channel_at(const HopBlock& block, std::int64_t t) const
    {
        const std::int64_t first = (block.sets.sub_block - 1) * config_.n_b + 1;
        return block.channels[static_cast<std::size_t>(t - first)];
    }

    static const std::vector<std::int64_t>& slots_of(const HopBlock& block, const CellIndex& cell)
    {
        static const std::vector<std::int64_t> empty;
        const auto it = block.sets.slots.find(cell);
        return it == block.sets.slots.end() ? empty : it->second;
    }

    void process_two_hop(const HopBlock& first, const HopBlock& second)
    {
        bool enc_error = false;
        bool rel_error = false;
        auto& t1 = report_.slots[0];
        auto& t2 = report_.slots[1];
        for (const auto& [cell, quota] : quotas_) {
            const auto& s1 = slots_of(first, cell);
            const auto& s2 = slots_of(second, cell);
            const auto n1 = static_cast<std::int64_t>(s1.size());
            const auto n2 = static_cast<std::int64_t>(s2.size());
            enc_error |= n1 < quota;
            rel_error |= n2 < quota;
            if (n1 < quota || n2 < quota) {
                t1.unmet_quota += n1;
                t2.unmet_quota += n2;
                continue;
            }
            for (std::int64_t r = 0; r < quota; ++r) {
                const CMatrix& h1 = channel_at(first, s1[static_cast<std::size_t>(r)]);
                const CMatrix& h2 = channel_at(second, s2[static_cast<std::size_t>(r)]);
                acc_.add(cascade_sinr_two_hop(h1, h2, config_.power));
                acc_.probe_power({&h1, &h2}, {gamma_two_hop(h1, config_.power)});
            }
            t1.transmitted += quota;
            t2.transmitted += quota;
        }
        report_.e1 += enc_error ? 1 : 0;
        report_.e2 += rel_error ? 1 : 0;
    }

    void process_three_hop(const HopBlock& first, const HopBlock& second, const HopBlock& third)
    {
        bool enc_error = false;
        bool rel_error = false;
        auto& t1 = report_.slots[0];
        std::unordered_map<CellIndex, std::size_t, CellIndexHash> used2;
        std::unordered_map<CellIndex, std::size_t, CellIndexHash> used3;

        struct Match
        {
            std::int64_t t1, t2, t3;
        };

        for (const auto& [cell, quota] : quotas_) {
            const auto& s1 = slots_of(first, cell);
            const auto n1 = static_cast<std::int64_t>(s1.size());
            if (n1 < quota) {
                enc_error = true;
                t1.unmet_quota += n1;
                continue;
            }
            // tentative forward matching; committed only if the whole quota is paired
            auto trial2 = used2;
            auto trial3 = used3;
            std::vector<Match> matches;
            for (std::int64_t r = 0; r < quota; ++r) {
                const std::int64_t ts = s1[static_cast<std::size_t>(r)];
                const CMatrix& h = channel_at(first, ts);
                std::optional<CellIndex> key2;
                std::optional<CellIndex> key3;
                try {
                    const PairingMap map = map_three_hop(config_.dist, h);
                    key2 = quantize(map.targets[0], config_.quantizer);
                    key3 = quantize(map.targets[1], config_.quantizer);
                } catch (const NumericError&) {
                    ++report_.rejected;
                }
                if (!key2 || !key3)
                    break;
                const auto& pool2 = slots_of(second, *key2);
                const auto& pool3 = slots_of(third, *key3);
                std::size_t& u2 = trial2[*key2];
                std::size_t& u3 = trial3[*key3];
                if (u2 >= pool2.size() || u3 >= pool3.size())
                    break;
                matches.push_back({ts, pool2[u2++], pool3[u3++]});
            }
            if (static_cast<std::int64_t>(matches.size()) < quota) {
                rel_error = true;
                t1.unmet_quota += n1;
                continue;
            }
            used2 = std::move(trial2);
            used3 = std::move(trial3);
            for (const Match& mt : matches) {
                const CMatrix& h1 = channel_at(first, mt.t1);
                const CMatrix& h2 = channel_at(second, mt.t2);
                const CMatrix& h3 = channel_at(third, mt.t3);
                acc_.add(cascade_sinr_three_hop(h1, h2, h3, config_.power));
                const GammaPair g = gammas_three_hop(h1, h2, config_.power);
                acc_.probe_power({&h1, &h2, &h3}, {g.gamma1, g.gamma2});
            }
            t1.transmitted += quota;
            report_.slots[1].transmitted += quota;
            report_.slots[2].transmitted += quota;
        }
        report_.e1 += enc_error ? 1 : 0;
        report_.e2 += rel_error ? 1 : 0;
    }

    const SimConfig& config_;
    int k_;
    int hops_;
    std::shared_ptr<const ChannelSource> source_;
    std::vector<Rng> hop_rng_;
    QuotaList quotas_;
    Accumulator acc_;
    SimReport report_;
};

} // namespace

SimReport run_block_sim(const SimConfig& config)
{
    config.validate();
    return BlockSimulator(config).run();
}

std::vector<SimReport> run_replicas(const SimConfig& config, const std::vector<std::uint64_t>& seeds, unsigned threads)
{
    config.validate();
    std::vector<SimReport> reports(seeds.size());
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, seeds.size())));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= seeds.size() || failed.load())
                return;
            try {
                SimConfig local = config;
                local.seed = seeds[i];
                reports[i] = BlockSimulator(local).run();
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return reports;
}

ErrorEventStats error_event_stats(const SimReport& report, const SimConfig& config)
{
    ErrorEventStats s;
    if (report.effective_sub_blocks > 0) {
        s.p_e1 = static_cast<double>(report.e1) / static_cast<double>(report.effective_sub_blocks);
        s.p_e2 = static_cast<double>(report.e2) / static_cast<double>(report.effective_sub_blocks);
    }
    s.bound = static_cast<double>(report.observed_cells) /
              (4.0 * static_cast<double>(config.n_b) * config.epsilon * config.epsilon);
    return s;
}

} // namespace afrelay
