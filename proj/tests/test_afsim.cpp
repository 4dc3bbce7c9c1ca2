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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "afrelay/afsim.hpp"

using namespace afrelay;
using Catch::Approx;

namespace {

const ChannelDistribution kGauss = ChannelDistribution::complex_gaussian();

CMatrix mat2(Complex a, Complex b, Complex c, Complex d)
{
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

const CMatrix kA = mat2(1, 1, -1, 0);
const CMatrix kAinv = mat2(0, -1, 1, 1);
const CMatrix kD = mat2(1, 0, 0, -1);

double log2_1p(double x)
{
    return std::log2(1.0 + x);
}

/// Alternating two-state channel: hop 1 is A, D, A, D, ... and hop 2 is D, A^{-1}, D, A^{-1}, ...
SimConfig intro_config(double power)
{
    SimConfig c;
    c.topology = Topology::uniform(2, 2);
    c.power = power;
    c.n_b = 1000;
    c.sub_blocks = 4;
    c.quantizer = {0.5, 4, 2};
    c.epsilon = 1e-3;
    c.calibration_samples = 1000;
    c.source = std::make_shared<PeriodicChannelSource>(std::vector<std::vector<CMatrix>>{{kA, kD}, {kD, kAinv}});
    return c;
}

void check_conservation(const SimReport& r, const SimConfig& c)
{
    REQUIRE(r.slots.size() == static_cast<std::size_t>(c.topology.hops));
    for (const auto& t : r.slots) {
        CHECK(t.total() == c.n_b * c.sub_blocks);
        CHECK(t.transmitted >= 0);
        CHECK(t.unused >= 0);
        CHECK(t.unmet_quota >= 0);
    }
}

} // namespace

TEST_CASE("default scaling")
{
    const ScalingDefaults a = default_scaling(1 << 24, 1);
    CHECK(a.delta == Approx(0.5).epsilon(1e-12));
    CHECK(a.q == 4);
    CHECK(a.epsilon == Approx(1.0 / 256.0).epsilon(1e-12));

    const ScalingDefaults b = default_scaling(1000000, 2);
    CHECK(b.delta == Approx(std::pow(10.0, -6.0 / 96.0)).epsilon(1e-12));
    CHECK(b.delta == Approx(0.866).margin(5e-4));
    CHECK(b.q == 2);
    CHECK(b.epsilon == Approx(0.01).epsilon(1e-12));

    for (int k = 1; k <= 3; ++k) {
        ScalingDefaults prev = default_scaling(2, k);
        for (std::int64_t n = 4; n <= (std::int64_t{1} << 40); n *= 2) {
            const ScalingDefaults cur = default_scaling(n, k);
            CHECK(cur.delta <= prev.delta);
            CHECK(cur.epsilon <= prev.epsilon);
            CHECK(cur.q >= prev.q);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(default_scaling(1, 1), PreconditionError);
    CHECK_THROWS_AS(default_scaling(10, 0), PreconditionError);
}

TEST_CASE("relay gains")
{
    CHECK(gamma_two_hop(CMatrix::Identity(3, 3), 1.0) == Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(gamma_two_hop(CMatrix::Zero(2, 2), 7.0) == Approx(std::sqrt(7.0)).epsilon(1e-15));

    const GammaPair z = gammas_three_hop(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2), 5.0);
    CHECK(z.gamma1 == Approx(std::sqrt(5.0)));
    CHECK(z.gamma2 == Approx(std::sqrt(5.0)));
    const GammaPair i = gammas_three_hop(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2), 1.0);
    CHECK(i.gamma1 == Approx(std::sqrt(0.5)));
    CHECK(i.gamma2 * i.gamma2 == Approx(0.5));

    Rng rng(20);
    for (int n = 0; n < 500; ++n) {
        const int k = 2 + n % 3;
        const double p = std::pow(10.0, (n % 5));
        const CMatrix h = sample_hop_matrix(kGauss, k, k, rng);
        const double g2 = std::pow(gamma_two_hop(h, p), 2);
        CHECK(1.0 / (1.0 + h.squaredNorm()) <= g2 * (1 + 1e-12));
        CHECK(g2 <= k / h.squaredNorm() * (1 + 1e-12));
        // relay i transmits g^2 (||row_i||^2 P + 1) <= P
        for (Eigen::Index r = 0; r < k; ++r)
            CHECK(g2 * (h.row(r).squaredNorm() * p + 1.0) <= p * (1 + 1e-12));

        const PairingMap m = map_three_hop(kGauss, h);
        const GammaPair g = gammas_three_hop(h, m.targets[0], p);
        const double g1sq = g.gamma1 * g.gamma1;
        const double g2sq = g.gamma2 * g.gamma2;
        CHECK(g2sq <= k / (g1sq * (m.targets[0] * h).squaredNorm()) * (1 + 1e-12));
        // second relay layer power: g2^2 (||row_i H2||^2 + g1^2 ||row_i H2 H1||^2 P ... ) <= P
        const CMatrix h21 = m.targets[0] * h;
        for (Eigen::Index r = 0; r < k; ++r)
            CHECK(g2sq * (1.0 + g1sq * (m.targets[0].row(r).squaredNorm() + h21.row(r).squaredNorm() * p)) <=
                  p * (1 + 1e-12));
    }
}

TEST_CASE("two-hop SINR")
{
    Rng rng(21);
    SECTION("zero quantization error")
    {
        for (int n = 0; n < 100; ++n) {
            const CMatrix h = sample_hop_matrix(kGauss, 3, 3, rng);
            const double p = 50.0;
            const double c = h.norm() / h.inverse().norm();
            const double g2 = p / (1.0 + h.rowwise().squaredNorm().maxCoeff() * p);
            for (int i = 0; i < 3; ++i) {
                const double expect = g2 * c * c * p / (1.0 + g2 * c * c * h.inverse().row(i).squaredNorm());
                CHECK(sinr_two_hop(kGauss, h, CMatrix::Zero(3, 3), p, i) == Approx(expect).epsilon(1e-12));
            }
        }
    }
    SECTION("intro fixture has no interference")
    {
        const CascadeSinr s = cascade_sinr_two_hop(kA, kAinv, 10.0);
        CHECK(s.interference[0] == 0.0);
        CHECK(s.interference[1] == 0.0);
        CHECK(map_two_hop(kGauss, kA).scales[0] == Approx(1.0).epsilon(1e-15));
        const CMatrix delta = kAinv - map_two_hop(kGauss, kA).target();
        CHECK(delta.norm() < 1e-14);
        CHECK(sinr_two_hop(kGauss, kA, delta, 10.0, 0) == Approx(s.sinr[0]).epsilon(1e-12));
    }
    SECTION("cascade form agrees with the perturbation form")
    {
        for (int n = 0; n < 100; ++n) {
            const CMatrix h = sample_hop_matrix(kGauss, 2, 2, rng);
            const CMatrix delta = 0.05 * sample_hop_matrix(kGauss, 2, 2, rng);
            const CascadeSinr s = cascade_sinr_two_hop(h, map_two_hop(kGauss, h).target() + delta, 30.0);
            for (int i = 0; i < 2; ++i)
                CHECK(sinr_two_hop(kGauss, h, delta, 30.0, i) == Approx(s.sinr[static_cast<std::size_t>(i)]).epsilon(1e-12));
        }
    }
    SECTION("interference scales with the square of the perturbation")
    {
        Rng fixture(2024);
        const CMatrix h = sample_hop_matrix(kGauss, 2, 2, fixture);
        const CMatrix f = map_two_hop(kGauss, h).target();
        const CMatrix delta = 0.2 * sample_hop_matrix(kGauss, 2, 2, fixture);
        const CascadeSinr coarse = cascade_sinr_two_hop(h, f + delta, 100.0);
        const CascadeSinr fine = cascade_sinr_two_hop(h, f + 0.5 * delta, 100.0);
        const CascadeSinr exact = cascade_sinr_two_hop(h, f, 100.0);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(coarse.interference[i] > 0.0);
            CHECK(fine.interference[i] == Approx(0.25 * coarse.interference[i]).epsilon(1e-9));
            CHECK(exact.interference[i] < 1e-20);
            CHECK(std::abs(sinr_two_hop(kGauss, h, 1e-9 * delta, 100.0, static_cast<int>(i)) - exact.sinr[i]) <
                  1e-6 * exact.sinr[i]);
        }
    }
}

TEST_CASE("three-hop SINR")
{
    Rng rng(22);
    SECTION("term-by-term oracle")
    {
        for (int n = 0; n < 50; ++n) {
            const CMatrix h = sample_hop_matrix(kGauss, 2, 2, rng);
            const CMatrix d1 = 0.03 * sample_hop_matrix(kGauss, 2, 2, rng);
            const CMatrix d2 = 0.03 * sample_hop_matrix(kGauss, 2, 2, rng);
            const double p = 100.0;
            const PairingMap m = map_three_hop(kGauss, h);
            const CMatrix& f1 = m.targets[0];
            const CMatrix& f2 = m.targets[1];
            const double c1 = m.scales[0], c2 = m.scales[1];
            const CMatrix h2 = f1 + d1;
            const CMatrix h3 = f2 + d2;

            double max1 = 0.0;
            for (int r = 0; r < 2; ++r)
                max1 = std::max(max1, std::norm(h(r, 0)) + std::norm(h(r, 1)));
            const double g1 = p / (1.0 + max1 * p);
            double max2 = 0.0;
            for (int r = 0; r < 2; ++r) {
                double a = 0.0, b = 0.0;
                for (int j = 0; j < 2; ++j) {
                    a += std::norm(h2(r, j));
                    Complex s = 0.0;
                    for (int l = 0; l < 2; ++l)
                        s += h2(r, l) * h(l, j);
                    b += std::norm(s);
                }
                max2 = std::max(max2, a + b * p);
            }
            const double g2 = p / (1.0 + g1 * max2);
            const CMatrix dt = f2 * d1 * h + d2 * f1 * h + d2 * d1 * h;
            const CMatrix h32 = h3 * h2;
            for (int i = 0; i < 2; ++i) {
                const int j = 1 - i;
                const double signal = g2 * g1 * std::norm(c1 * c2 + dt(i, i)) * p;
                const double interf = g2 * g1 * std::norm(dt(i, j)) * p;
                double noise = 1.0;
                for (int l = 0; l < 2; ++l)
                    noise += g2 * std::norm(h3(i, l)) + g2 * g1 * std::norm(h32(i, l));
                CHECK(sinr_three_hop(kGauss, h, d1, d2, p, i) == Approx(signal / (interf + noise)).epsilon(1e-12));
            }
            const CascadeSinr s = cascade_sinr_three_hop(h, h2, h3, p);
            for (int i = 0; i < 2; ++i)
                CHECK(s.sinr[static_cast<std::size_t>(i)] ==
                      Approx(sinr_three_hop(kGauss, h, d1, d2, p, i)).epsilon(1e-12));
        }
    }
    SECTION("scalar channel collapse")
    {
        for (int n = 0; n < 50; ++n) {
            const CMatrix h = sample_hop_matrix(kGauss, 1, 1, rng);
            const double a = std::abs(h(0, 0));
            const double p = 20.0;
            const double g1 = p / (1.0 + a * a * p);
            const double g2 = p / (1.0 + g1 * (a * a + std::pow(a, 4) * p));
            const double expect =
                g2 * g1 * std::pow(a, 6) * p / (1.0 + g2 * a * a + g2 * g1 * std::pow(a, 4));
            CHECK(sinr_three_hop(kGauss, h, CMatrix::Zero(1, 1), CMatrix::Zero(1, 1), p, 0) ==
                  Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("intro fixture through the block simulator")
{
    const double p = 10.0;
    const SimConfig c = intro_config(p);
    const SimReport r = run_block_sim(c);

    CHECK(r.e1 == 0);
    CHECK(r.e2 == 0);
    CHECK(r.max_interference == 0.0);
    CHECK(r.mean_interference == std::vector<double>{0.0, 0.0});
    CHECK(r.positive_quota_cells == 2);
    check_conservation(r, c);

    // quota floor(1000 (1/2 - 1e-3)) = 499 per cell and sub-block
    const std::int64_t quota = 499;
    CHECK(r.slots[0].transmitted == 2 * quota * r.effective_sub_blocks);
    CHECK(r.utilization == Approx(2.0 * quota / 1000.0).epsilon(1e-15));

    const double ga = p / (1.0 + 2.0 * p);
    const double gd = p / (1.0 + p);
    const double sd = gd * p / (1.0 + gd);
    const double sa[2] = {ga * p / (1.0 + ga * 1.0), ga * p / (1.0 + ga * 2.0)};
    for (int i = 0; i < 2; ++i) {
        const double expect = quota * (log2_1p(sa[i]) + log2_1p(sd)) / 1000.0;
        CHECK(r.rate_bits[static_cast<std::size_t>(i)] == Approx(expect).epsilon(1e-12));
    }

    double prev = 0.0;
    for (double pw : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const SimReport rp = run_block_sim(intro_config(pw));
        CHECK(rp.rate_bits[0] >= prev);
        prev = rp.rate_bits[0];
    }
}

TEST_CASE("three-hop deterministic chain")
{
    CMatrix h(2, 2);
    h << 3, 0, 0, -2;
    const PairingMap m = map_three_hop(kGauss, h);
    SimConfig c;
    c.topology = Topology::uniform(3, 2);
    c.power = 100.0;
    c.n_b = 500;
    c.sub_blocks = 5;
    c.quantizer = {0.5, 8, 2};
    c.epsilon = 1e-3;
    c.calibration_samples = 100;
    c.source = std::make_shared<PeriodicChannelSource>(
        std::vector<std::vector<CMatrix>>{{h}, {m.targets[0]}, {m.targets[1]}});
    const SimReport r = run_block_sim(c);
    CHECK(r.e1 == 0);
    CHECK(r.e2 == 0);
    CHECK(r.effective_sub_blocks == 3);
    CHECK(r.max_interference < 1e-20);
    CHECK(r.slots[0].transmitted == 499 * 3);
    CHECK(r.slots[1].transmitted == 499 * 3);
    CHECK(r.slots[2].transmitted == 499 * 3);
    check_conservation(r, c);
    const CascadeSinr s = cascade_sinr_three_hop(h, m.targets[0], m.targets[1], 100.0);
    for (int i = 0; i < 2; ++i)
        CHECK(r.rate_bits[static_cast<std::size_t>(i)] ==
              Approx(499.0 * log2_1p(s.sinr[static_cast<std::size_t>(i)]) / 500.0).epsilon(1e-12));
}

TEST_CASE("empty quotas give zero rate and no errors")
{
    SimConfig c;
    c.topology = Topology::uniform(2, 2);
    c.power = 100.0;
    c.n_b = 200;
    c.sub_blocks = 3;
    c.quantizer = {0.9, 2, 2};
    c.epsilon = 0.5;
    c.calibration_samples = 20000;
    const SimReport r = run_block_sim(c);
    CHECK(r.positive_quota_cells == 0);
    CHECK(r.rate_bits == std::vector<double>{0.0, 0.0});
    CHECK(r.e1 == 0);
    CHECK(r.e2 == 0);
    check_conservation(r, c);
    const ErrorEventStats s = error_event_stats(r, c);
    CHECK(s.p_e1 == 0.0);
    CHECK(s.p_e2 == 0.0);
    CHECK(s.bound == Approx(r.observed_cells / (4.0 * 200 * 0.25)));
}

TEST_CASE("gaussian runs: conservation, reproducibility, power")
{
    SimConfig c;
    c.topology = Topology::uniform(2, 2);
    c.power = 100.0;
    c.n_b = 10000;
    c.sub_blocks = 4;
    c.quantizer = {2.0, 1, 2};
    c.epsilon = 0.01;
    c.calibration_samples = 200000;
    c.sample_noise = true;
    c.seed = 77;
    const SimReport a = run_block_sim(c);
    const SimReport b = run_block_sim(c);
    check_conservation(a, c);
    CHECK(a.rate_bits == b.rate_bits);
    CHECK(a.mean_sinr == b.mean_sinr);
    CHECK(a.e1 == b.e1);
    CHECK(a.transmitted_slots == b.transmitted_slots);
    CHECK(a.transmitted_slots > 10000);
    CHECK(a.relay_power_ratio <= 1.02);
    CHECK(a.source_power_ratio == Approx(1.0).margin(0.05));
    for (double rate : a.rate_bits)
        CHECK(rate > 0.0);
    CHECK(a.e1 <= a.effective_sub_blocks);

    SimConfig t = c;
    t.topology = Topology::uniform(3, 2);
    t.sub_blocks = 5;
    const SimReport r3 = run_block_sim(t);
    check_conservation(r3, t);
    CHECK(r3.slots[1].transmitted == r3.slots[0].transmitted);
    CHECK(r3.slots[2].transmitted == r3.slots[0].transmitted);
    CHECK(r3.relay_power_ratio <= 1.02);
    CHECK(r3.e2 <= r3.effective_sub_blocks);
}

TEST_CASE("two-hop time sets pair through the involution")
{
    SimConfig c;
    c.topology = Topology::uniform(2, 2);
    c.quantizer = {0.8, 3, 2};
    c.n_b = 2000;
    Rng rng(23);
    std::vector<CMatrix> channels;
    for (int t = 0; t < 2000; ++t)
        channels.push_back(sample_hop_matrix(kGauss, 2, 2, rng));
    const TimeIndexSets s = collect_time_sets(c, 2, 3, channels);
    std::int64_t members = 0;
    for (const auto& [cell, slots] : s.slots) {
        for (std::int64_t t : slots) {
            CHECK(t > 2 * c.n_b);
            CHECK(t <= 3 * c.n_b);
            const CMatrix& g = channels[static_cast<std::size_t>(t - 2 * c.n_b - 1)];
            CHECK(quantize(map_two_hop(kGauss, g).target(), c.quantizer) == cell);
            ++members;
        }
    }
    CHECK(members + s.out_of_range == 2000);
}

TEST_CASE("configuration errors name the field")
{
    SimConfig c;
    c.topology = Topology::uniform(3, 2);
    c.quantizer = {0.5, 2, 2};
    c.sub_blocks = 2;
    try {
        c.validate();
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "B");
    }
    c.sub_blocks = 3;
    CHECK_NOTHROW(c.validate());
    c.epsilon = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.epsilon = 0.1;
    c.quantizer.k = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("replicas are ordered and thread-count independent")
{
    SimConfig c;
    c.topology = Topology::uniform(2, 1);
    c.power = 10.0;
    c.n_b = 3000;
    c.sub_blocks = 3;
    c.quantizer = {1.0, 2, 1};
    c.epsilon = 0.02;
    c.calibration_samples = 100000;
    const std::vector<std::uint64_t> seeds{5, 6, 7, 8};
    const auto serial = run_replicas(c, seeds, 1);
    const auto parallel = run_replicas(c, seeds, 3);
    REQUIRE(serial.size() == 4);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CHECK(serial[i].seed == seeds[i]);
        CHECK(serial[i].rate_bits == parallel[i].rate_bits);
        SimConfig one = c;
        one.seed = seeds[i];
        CHECK(run_block_sim(one).rate_bits == serial[i].rate_bits);
    }
}

TEST_CASE("error frequencies stay below the concentration bound")
{
    SimConfig c;
    c.topology = Topology::uniform(2, 1);
    c.power = 10.0;
    c.n_b = 20000;
    c.sub_blocks = 3;
    c.quantizer = {1.0, 2, 1};
    c.epsilon = 0.05;
    c.calibration = std::make_shared<CellCalibration>(calibrate(c, 1000000, 99));
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 100; ++s)
        seeds.push_back(s);
    std::int64_t e1 = 0, e2 = 0, blocks = 0;
    for (const auto& r : run_replicas(c, seeds, 1)) {
        e1 += r.e1;
        e2 += r.e2;
        blocks += r.effective_sub_blocks;
    }
    const SimReport any = run_block_sim(c);
    const ErrorEventStats s = error_event_stats(any, c);
    CHECK(s.bound < 1.0);
    CHECK(static_cast<double>(e1) / blocks <= s.bound);
    CHECK(static_cast<double>(e2) / blocks <= s.bound);

    SimConfig bigger = c;
    bigger.n_b *= 2;
    CHECK(error_event_stats(any, bigger).bound == Approx(s.bound / 2.0));
}
