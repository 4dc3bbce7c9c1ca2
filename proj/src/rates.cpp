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

#include "afrelay/rates.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

#include <Eigen/SVD>

#include "afrelay/afsim.hpp"
#include "afrelay/pairing.hpp"

namespace afrelay {

namespace {

constexpr double kMaxRejectFraction = 1e-3;

double log2_1p(double x)
{
    return std::log1p(x) / std::numbers::ln2;
}

class RunningStats
{
  public:
    void add(double x)
    {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    double mean() const { return mean_; }
    double stderr_() const
    {
        if (n_ < 2)
            return 0.0;
        return std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_));
    }

  private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

enum class Admission
{
    FullRank,
    DistinctEigs,
};

void check_rejections(std::int64_t rejected, std::int64_t samples)
{
    if (static_cast<double>(rejected) > kMaxRejectFraction * static_cast<double>(samples + rejected))
        throw NumericError("rejected " + std::to_string(rejected) + " of " + std::to_string(samples + rejected) +
                           " draws; check the admission tolerances");
}

/// Draws a k x k matrix from the trial stream, redrawing until admitted.
/// Gives up once the rejections exceed the budget of a `samples`-trial run.
CMatrix admitted_draw(const ChannelDistribution& dist, int k, Admission rule, Rng& rng, std::int64_t& rejected,
                      std::int64_t samples)
{
    for (;;) {
        CMatrix h = sample_hop_matrix(dist, k, k, rng);
        const bool ok = rule == Admission::FullRank ? is_full_rank(h) : has_distinct_eigs(h);
        if (ok)
            return h;
        ++rejected;
        check_rejections(rejected, samples);
    }
}

void check_inputs(int k, double power, std::int64_t samples)
{
    if (k < 1)
        throw PreconditionError("k must be >= 1");
    if (!(power > 0.0) || !std::isfinite(power))
        throw PreconditionError("power must be positive");
    if (samples < 1)
        throw PreconditionError("samples must be >= 1");
}

template <class Integrand>
RateResult rate_mc(const ChannelDistribution& dist, int k, double power, std::int64_t samples, std::uint64_t seed,
                   Admission rule, const std::string& scheme, Integrand integrand)
{
    check_inputs(k, power, samples);
    std::vector<RunningStats> stats(static_cast<std::size_t>(k));
    RateResult out;
    for (std::int64_t t = 0; t < samples; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<double> r;
        for (;;) {
            const CMatrix h = admitted_draw(dist, k, rule, rng, out.rejected, samples);
            try {
                r = integrand(dist, h, power);
                break;
            } catch (const DegenerateInputError&) {
                ++out.rejected;
                check_rejections(out.rejected, samples);
            }
        }
        for (std::size_t i = 0; i < r.size(); ++i)
            stats[i].add(r[i]);
    }
    check_rejections(out.rejected, samples);
    for (const auto& s : stats) {
        out.rate_bits.push_back(s.mean());
        out.stderr_bits.push_back(s.stderr_());
    }
    out.samples = samples;
    out.power = power;
    out.scheme = scheme;
    return out;
}

} // namespace

double RateResult::sum() const
{
    return std::accumulate(rate_bits.begin(), rate_bits.end(), 0.0);
}

std::vector<double> two_hop_integrand(const ChannelDistribution& dist, const CMatrix& h, double power)
{
    const PairingMap map = map_two_hop(dist, h);
    const double c = map.scales[0];
    const CMatrix inv = map.target() / c;
    const double g2 = std::pow(gamma_two_hop(h, power), 2);
    const double gc2 = g2 * c * c;
    std::vector<double> out(static_cast<std::size_t>(h.rows()));
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        out[static_cast<std::size_t>(i)] = log2_1p(gc2 * power / (1.0 + gc2 * inv.row(i).squaredNorm()));
    return out;
}

std::vector<double> three_hop_integrand(const ChannelDistribution& dist, const CMatrix& h, double power)
{
    const PairingMap map = map_three_hop(dist, h);
    const CMatrix& f1 = map.targets[0];
    const CMatrix& f2 = map.targets[1];
    const double c12 = map.scales[0] * map.scales[1];
    const GammaPair g = gammas_three_hop(h, f1, power);
    const double g1 = g.gamma1 * g.gamma1;
    const double g2 = g.gamma2 * g.gamma2;
    const CMatrix f21 = f2 * f1;
    std::vector<double> out(static_cast<std::size_t>(h.rows()));
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double noise = 1.0 + g2 * f2.row(i).squaredNorm() + g2 * g1 * f21.row(i).squaredNorm();
        out[static_cast<std::size_t>(i)] = log2_1p(g2 * g1 * c12 * c12 * power / noise);
    }
    return out;
}

RateResult rate_two_hop_mc(const ChannelDistribution& dist, int k, double power, std::int64_t samples,
                           std::uint64_t seed)
{
    return rate_mc(dist, k, power, samples, seed, Admission::FullRank, scheme_label(2), two_hop_integrand);
}

RateResult rate_three_hop_mc(const ChannelDistribution& dist, int k, double power, std::int64_t samples,
                             std::uint64_t seed)
{
    return rate_mc(dist, k, power, samples, seed, Admission::DistinctEigs, scheme_label(3), three_hop_integrand);
}

std::vector<double> waterfill(const std::vector<double>& gains, double total_power)
{
    if (!(total_power >= 0.0) || !std::isfinite(total_power))
        throw PreconditionError("waterfill: total power must be >= 0");
    for (double g : gains)
        if (!(g >= 0.0) || !std::isfinite(g))
            throw PreconditionError("waterfill: gains must be finite and >= 0");
    std::vector<double> p(gains.size(), 0.0);
    if (gains.empty() || total_power == 0.0)
        return p;

    std::vector<std::size_t> order(gains.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
    if (gains[order.front()] == 0.0) {
        std::fill(p.begin(), p.end(), total_power / static_cast<double>(p.size()));
        return p;
    }

    // largest active set whose water level clears every member's floor
    double inv_sum = 0.0;
    double level = 0.0;
    std::size_t active = 0;
    for (std::size_t n = 1; n <= order.size(); ++n) {
        const double g = gains[order[n - 1]];
        if (g == 0.0)
            break;
        const double candidate = (total_power + inv_sum + 1.0 / g) / static_cast<double>(n);
        if (candidate <= 1.0 / g)
            break;
        inv_sum += 1.0 / g;
        level = candidate;
        active = n;
    }
    for (std::size_t n = 0; n < active; ++n)
        p[order[n]] = level - 1.0 / gains[order[n]];
    return p;
}

double waterfill_capacity(const std::vector<double>& gains, double total_power)
{
    const std::vector<double> p = waterfill(gains, total_power);
    double c = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        c += log2_1p(p[i] * gains[i]);
    return c;
}

double cutset_capacity(const CMatrix& h, double power)
{
    if (!(power > 0.0))
        throw PreconditionError("cutset_capacity: power must be positive");
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(h).singularValues();
    std::vector<double> gains(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.size(); ++i)
        gains[static_cast<std::size_t>(i)] = s(i) * s(i);
    return waterfill_capacity(gains, static_cast<double>(h.cols()) * power);
}

RateResult cutset_sum_upper(const ChannelDistribution& dist, int k_tx, int k_rx, double power, std::int64_t samples,
                            std::uint64_t seed)
{
    check_inputs(std::min(k_tx, k_rx), power, samples);
    RunningStats stats;
    for (std::int64_t t = 0; t < samples; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        stats.add(cutset_capacity(sample_hop_matrix(dist, k_rx, k_tx, rng), power));
    }
    RateResult out;
    out.rate_bits = {stats.mean()};
    out.stderr_bits = {stats.stderr_()};
    out.samples = samples;
    out.power = power;
    out.scheme = "cutset";
    return out;
}

std::vector<SweepRow> gap_table(const ChannelDistribution& dist, int k, int m, const std::vector<double>& snr_db_list,
                                std::int64_t samples, std::uint64_t seed)
{
    if (m != 2 && m != 3)
        throw PreconditionError("gap_table: m must be 2 or 3");
    if (snr_db_list.empty())
        throw PreconditionError("gap_table: empty SNR list");
    std::vector<double> powers;
    for (double db : snr_db_list) {
        if (!std::isfinite(db))
            throw PreconditionError("gap_table: SNR must be finite");
        powers.push_back(db_to_linear(db));
    }
    check_inputs(k, powers.front(), samples);

    const Admission rule = m == 2 ? Admission::FullRank : Admission::DistinctEigs;
    const auto integrand = m == 2 ? two_hop_integrand : three_hop_integrand;
    const std::size_t n = powers.size();
    std::vector<RunningStats> ach(n), cut(n), gap(n);
    std::int64_t rejected = 0;
    for (std::int64_t t = 0; t < samples; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<double> a(n), c(n);
        for (bool done = false; !done;) {
            const CMatrix h = admitted_draw(dist, k, rule, rng, rejected, samples);
            try {
                for (std::size_t s = 0; s < n; ++s) {
                    const auto r = integrand(dist, h, powers[s]);
                    a[s] = std::accumulate(r.begin(), r.end(), 0.0);
                    c[s] = cutset_capacity(h, powers[s]);
                }
                done = true;
            } catch (const DegenerateInputError&) {
                ++rejected;
                check_rejections(rejected, samples);
            }
        }
        for (std::size_t s = 0; s < n; ++s) {
            ach[s].add(a[s]);
            cut[s].add(c[s]);
            gap[s].add(c[s] - a[s]);
        }
    }
    check_rejections(rejected, samples);

    std::vector<SweepRow> rows;
    for (std::size_t s = 0; s < n; ++s) {
        SweepRow r;
        r.snr_db = snr_db_list[s];
        r.k = k;
        r.m = m;
        r.scheme = scheme_label(m);
        r.achievable_sum = ach[s].mean();
        r.cutset_sum = cut[s].mean();
        r.gap = r.cutset_sum - r.achievable_sum;
        r.stderr_gap = gap[s].stderr_();
        r.stderr_achievable = ach[s].stderr_();
        r.stderr_cutset = cut[s].stderr_();
        r.samples = samples;
        r.seed = seed;
        rows.push_back(std::move(r));
    }
    return rows;
}

SlopeEstimate dof_slope(const std::function<Estimate(double)>& rate_fn, double p_lo, double p_hi)
{
    if (!(p_lo > 0.0) || !(p_hi > p_lo))
        throw PreconditionError("dof_slope: need P_hi > P_lo > 0");
    const Estimate lo = rate_fn(p_lo);
    const Estimate hi = rate_fn(p_hi);
    const double span = std::log2(p_hi) - std::log2(p_lo);
    return {(hi.mean - lo.mean) / span, std::hypot(hi.stderr_, lo.stderr_) / span};
}

std::vector<int> hop_decompose(int m)
{
    if (m < 2)
        throw PreconditionError("hop_decompose: M must be >= 2");
    std::vector<int> segments(static_cast<std::size_t>(m / 2 - (m % 2)), 2);
    if (m % 2 == 1)
        segments.push_back(3);
    return segments;
}

std::string scheme_label(int m)
{
    switch (m) {
    case 2:
        return "two_hop";
    case 3:
        return "three_hop";
    default:
        return "composite_m" + std::to_string(m);
    }
}

} // namespace afrelay
