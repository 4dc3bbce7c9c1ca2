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

#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "afrelay/afsim.hpp"
#include "afrelay/cli.hpp"
#include "afrelay/dofregion.hpp"
#include "afrelay/pairing.hpp"
#include "afrelay/rates.hpp"

namespace py = pybind11;
using namespace afrelay;

namespace {

const ChannelDistribution& gaussian()
{
    static const ChannelDistribution dist = ChannelDistribution::complex_gaussian();
    return dist;
}

Topology make_topology(const std::vector<int>& layers, const std::vector<std::vector<int>>& antennas)
{
    Topology t;
    t.layer_sizes = layers;
    t.hops = static_cast<int>(layers.size()) - 1;
    t.antennas = antennas;
    t.validate();
    return t;
}

MessageSet make_messages(const std::vector<std::pair<int, int>>& pairs)
{
    MessageSet msgs;
    for (const auto& [j, i] : pairs)
        msgs.push_back({j, i});
    return msgs;
}

py::dict rate_dict(const RateResult& r)
{
    py::dict d;
    d["rate_bits"] = r.rate_bits;
    d["stderr_bits"] = r.stderr_bits;
    d["samples"] = r.samples;
    d["rejected"] = r.rejected;
    d["power"] = r.power;
    d["scheme"] = r.scheme;
    return d;
}

py::dict polytope_dict(const DofPolytope& p, const Topology& t)
{
    py::list ineqs;
    for (const auto& q : p.inequalities) {
        py::dict d;
        d["coeffs"] = q.coeffs;
        d["rhs"] = q.rhs;
        d["label"] = q.label;
        ineqs.append(d);
    }
    py::dict d;
    d["labels"] = p.labels;
    d["inequalities"] = ineqs;
    d["corners"] = corner_points(p, t);
    return d;
}

} // namespace

PYBIND11_MODULE(_afrelay, m)
{
    m.doc() = "Block Markov amplify-and-forward relaying toolkit";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ArithmeticError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    m.def(
        "sample_hop_matrix",
        [](int rows, int cols, std::uint64_t seed) {
            Rng rng(seed);
            return sample_hop_matrix(gaussian(), rows, cols, rng);
        },
        py::arg("rows"), py::arg("cols"), py::arg("seed"));
    m.def(
        "log_pdf_matrix", [](const CMatrix& h) { return log_pdf_matrix(gaussian(), h); }, py::arg("h"));
    m.def("is_full_rank", &is_full_rank, py::arg("h"), py::arg("tol") = 1e-12);
    m.def("has_distinct_eigs", &has_distinct_eigs, py::arg("h"), py::arg("tol") = 1e-9);

    m.def(
        "solve_c", [](const CMatrix& ref, const CMatrix& shape) { return solve_c(gaussian(), ref, shape); },
        py::arg("reference"), py::arg("shape"));
    m.def(
        "solve_c_bisection",
        [](const CMatrix& ref, const CMatrix& shape) { return solve_c_bisection(gaussian(), ref, shape); },
        py::arg("reference"), py::arg("shape"));
    m.def(
        "map_two_hop",
        [](const CMatrix& h) {
            const PairingMap p = map_two_hop(gaussian(), h);
            return py::make_tuple(p.target(), p.scales[0], p.residual);
        },
        py::arg("h"), "Returns (F(H), c, residual).");
    m.def(
        "map_three_hop",
        [](const CMatrix& h) {
            const PairingMap p = map_three_hop(gaussian(), h);
            return py::make_tuple(p.targets[0], p.targets[1], p.scales[0], p.scales[1], p.residual);
        },
        py::arg("h"), "Returns (F1(H), F2(H), c1, c2, residual).");
    m.def(
        "quantize",
        [](const CMatrix& h, double delta, int q) -> std::optional<std::vector<std::int32_t>> {
            QuantizerSpec spec{delta, q, static_cast<int>(h.rows())};
            const auto cell = quantize(h, spec);
            if (!cell)
                return std::nullopt;
            return cell->coords;
        },
        py::arg("h"), py::arg("delta"), py::arg("q"));
    m.def(
        "cell_center",
        [](const std::vector<std::int32_t>& coords, double delta, int k) {
            return cell_center(CellIndex{coords}, QuantizerSpec{delta, 1, k});
        },
        py::arg("coords"), py::arg("delta"), py::arg("k"));

    m.def(
        "default_scaling",
        [](std::int64_t n_b, int k) {
            const ScalingDefaults s = default_scaling(n_b, k);
            return py::make_tuple(s.delta, s.q, s.epsilon);
        },
        py::arg("n_b"), py::arg("k"));
    m.def("gamma_two_hop", &gamma_two_hop, py::arg("h1"), py::arg("power"));
    m.def(
        "gammas_three_hop",
        [](const CMatrix& h1, const CMatrix& h2, double p) {
            const GammaPair g = gammas_three_hop(h1, h2, p);
            return py::make_tuple(g.gamma1, g.gamma2);
        },
        py::arg("h1"), py::arg("h2"), py::arg("power"));
    m.def(
        "sinr_two_hop",
        [](const CMatrix& h, const CMatrix& delta, double p, int i) { return sinr_two_hop(gaussian(), h, delta, p, i); },
        py::arg("h"), py::arg("delta"), py::arg("power"), py::arg("pair"));
    m.def(
        "sinr_three_hop",
        [](const CMatrix& h, const CMatrix& d1, const CMatrix& d2, double p, int i) {
            return sinr_three_hop(gaussian(), h, d1, d2, p, i);
        },
        py::arg("h"), py::arg("delta1"), py::arg("delta2"), py::arg("power"), py::arg("pair"));

    m.def(
        "simulate",
        [](int k, int m_hops, double power, std::int64_t n_b, std::int64_t sub_blocks, double delta, int q,
           double epsilon, std::uint64_t seed, std::int64_t calibration_samples) {
            SimConfig c;
            c.topology = Topology::uniform(m_hops, k);
            c.power = power;
            c.n_b = n_b;
            c.sub_blocks = sub_blocks;
            c.quantizer = {delta, q, k};
            c.epsilon = epsilon;
            c.seed = seed;
            c.calibration_samples = calibration_samples;
            SimReport r;
            {
                py::gil_scoped_release release;
                r = run_block_sim(c);
            }
            py::dict d;
            d["rate_bits"] = r.rate_bits;
            d["mean_sinr"] = r.mean_sinr;
            d["mean_interference"] = r.mean_interference;
            d["e1"] = r.e1;
            d["e2"] = r.e2;
            d["utilization"] = r.utilization;
            d["out_of_range_fraction"] = r.out_of_range_fraction;
            d["rejected"] = r.rejected;
            d["transmitted_slots"] = r.transmitted_slots;
            d["effective_sub_blocks"] = r.effective_sub_blocks;
            return d;
        },
        py::arg("k"), py::arg("m"), py::arg("power"), py::arg("n_b"), py::arg("sub_blocks"), py::arg("delta"),
        py::arg("q"), py::arg("epsilon"), py::arg("seed") = 1, py::arg("calibration_samples") = 0);

    m.def(
        "rate_two_hop",
        [](int k, double p, std::int64_t samples, std::uint64_t seed) {
            return rate_dict(rate_two_hop_mc(gaussian(), k, p, samples, seed));
        },
        py::arg("k"), py::arg("power"), py::arg("samples"), py::arg("seed") = 1);
    m.def(
        "rate_three_hop",
        [](int k, double p, std::int64_t samples, std::uint64_t seed) {
            return rate_dict(rate_three_hop_mc(gaussian(), k, p, samples, seed));
        },
        py::arg("k"), py::arg("power"), py::arg("samples"), py::arg("seed") = 1);
    m.def("waterfill", &waterfill, py::arg("gains"), py::arg("total_power"));
    m.def("cutset_capacity", &cutset_capacity, py::arg("h"), py::arg("power"));
    m.def(
        "cutset_sum_upper",
        [](int k_tx, int k_rx, double p, std::int64_t samples, std::uint64_t seed) {
            return rate_dict(cutset_sum_upper(gaussian(), k_tx, k_rx, p, samples, seed));
        },
        py::arg("k_tx"), py::arg("k_rx"), py::arg("power"), py::arg("samples"), py::arg("seed") = 1);
    m.def(
        "gap_table",
        [](int k, int m_hops, const std::vector<double>& snr_db, std::int64_t samples, std::uint64_t seed) {
            py::list rows;
            for (const auto& r : gap_table(gaussian(), k, m_hops, snr_db, samples, seed)) {
                py::dict d;
                d["snr_db"] = r.snr_db;
                d["achievable_sum"] = r.achievable_sum;
                d["cutset_sum"] = r.cutset_sum;
                d["gap"] = r.gap;
                d["stderr_gap"] = r.stderr_gap;
                rows.append(d);
            }
            return rows;
        },
        py::arg("k"), py::arg("m"), py::arg("snr_db"), py::arg("samples"), py::arg("seed") = 1);
    m.def("hop_decompose", &hop_decompose, py::arg("m"));

    m.def(
        "region_basic",
        [](const std::vector<int>& layers) {
            const Topology t = make_topology(layers, {});
            return polytope_dict(region_basic(t), t);
        },
        py::arg("layers"));
    m.def(
        "region_general",
        [](const std::vector<int>& layers, const std::vector<std::vector<int>>& antennas,
           const std::vector<std::pair<int, int>>& messages) {
            const Topology t = make_topology(layers, antennas);
            return polytope_dict(region_general(t, make_messages(messages)), t);
        },
        py::arg("layers"), py::arg("antennas"), py::arg("messages"));
    m.def(
        "region_contains",
        [](const std::vector<int>& layers, const std::vector<double>& point, double tol) {
            return contains(region_basic(make_topology(layers, {})), std::span<const double>(point), tol);
        },
        py::arg("layers"), py::arg("point"), py::arg("tol") = 1e-9);
    m.def(
        "greedy_allocate",
        [](const std::vector<int>& layers, const std::vector<std::vector<int>>& antennas,
           const std::vector<std::pair<int, int>>& messages, const std::vector<std::size_t>& order) {
            return greedy_allocate(make_topology(layers, antennas), make_messages(messages), order);
        },
        py::arg("layers"), py::arg("antennas"), py::arg("messages"), py::arg("order"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            std::ostringstream err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr).");
}
