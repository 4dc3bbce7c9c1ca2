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

#include "afrelay/dofregion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace afrelay {

namespace {

Inequality make_inequality(std::size_t dim, std::int64_t rhs, std::string label)
{
    return {std::vector<std::int64_t>(dim, 0), rhs, std::move(label)};
}

void check_messages(const Topology& topology, const MessageSet& messages)
{
    const int k_src = topology.layer_size(0);
    const int k_dst = topology.layer_size(topology.hops);
    std::set<Message> seen;
    for (std::size_t n = 0; n < messages.size(); ++n) {
        const Message& msg = messages[n];
        const std::string key = "messages[" + std::to_string(n) + "]";
        if (msg.source < 1 || msg.source > k_src)
            throw ConfigError(key, "source " + std::to_string(msg.source) + " does not exist");
        if (msg.destination < 1 || msg.destination > k_dst)
            throw ConfigError(key, "destination " + std::to_string(msg.destination) + " does not exist");
        if (!seen.insert(msg).second)
            throw ConfigError(key, "duplicate message " + message_label(msg));
    }
}

std::int64_t layer_cap(const Topology& topology)
{
    std::int64_t cap = topology.layer_antenna_total(0);
    for (int m = 1; m <= topology.hops; ++m)
        cap = std::min<std::int64_t>(cap, topology.layer_antenna_total(m));
    return cap;
}

void check_dimension(const DofPolytope& poly, std::size_t n)
{
    if (n != poly.dimension())
        throw PreconditionError("point has dimension " + std::to_string(n) + ", region has " +
                                std::to_string(poly.dimension()));
}

} // namespace

std::string message_label(const Message& msg)
{
    if (msg.destination < 10 && msg.source < 10)
        return "d_" + std::to_string(msg.destination) + std::to_string(msg.source);
    return "d_" + std::to_string(msg.destination) + "," + std::to_string(msg.source);
}

DofPolytope region_basic(const Topology& topology)
{
    topology.validate();
    if (!topology.single_antenna())
        throw PreconditionError("region_basic: multi-antenna topology, use region_general");
    const int k = topology.layer_size(0);
    if (topology.layer_size(topology.hops) != k)
        throw PreconditionError("region_basic: source and destination layers differ in size");

    DofPolytope poly;
    poly.family = RegionFamily::Basic;
    const auto dim = static_cast<std::size_t>(k);
    for (int i = 1; i <= k; ++i)
        poly.labels.push_back("d_" + std::to_string(i));
    for (std::size_t i = 0; i < dim; ++i) {
        Inequality ineq = make_inequality(dim, 1, poly.labels[i] + " <= 1");
        ineq.coeffs[i] = 1;
        poly.inequalities.push_back(std::move(ineq));
    }
    Inequality sum = make_inequality(dim, topology.min_layer_size(), "sum");
    std::fill(sum.coeffs.begin(), sum.coeffs.end(), 1);
    poly.inequalities.push_back(std::move(sum));
    return poly;
}

DofPolytope region_general(const Topology& topology, const MessageSet& messages)
{
    topology.validate();
    check_messages(topology, messages);

    DofPolytope poly;
    poly.family = RegionFamily::General;
    poly.messages = messages;
    const std::size_t dim = messages.size();
    for (const auto& msg : messages)
        poly.labels.push_back(message_label(msg));

    std::set<int> destinations;
    std::set<int> sources;
    for (const auto& msg : messages) {
        destinations.insert(msg.destination);
        sources.insert(msg.source);
    }
    for (int j : destinations) {
        Inequality ineq =
            make_inequality(dim, topology.antennas_at(topology.hops, j - 1), "destination " + std::to_string(j));
        for (std::size_t n = 0; n < dim; ++n)
            ineq.coeffs[n] = messages[n].destination == j ? 1 : 0;
        poly.inequalities.push_back(std::move(ineq));
    }
    for (int i : sources) {
        Inequality ineq = make_inequality(dim, topology.antennas_at(0, i - 1), "source " + std::to_string(i));
        for (std::size_t n = 0; n < dim; ++n)
            ineq.coeffs[n] = messages[n].source == i ? 1 : 0;
        poly.inequalities.push_back(std::move(ineq));
    }
    Inequality total = make_inequality(dim, layer_cap(topology), "sum");
    std::fill(total.coeffs.begin(), total.coeffs.end(), 1);
    poly.inequalities.push_back(std::move(total));
    return poly;
}

bool contains(const DofPolytope& poly, std::span<const double> point, double tol)
{
    check_dimension(poly, point.size());
    for (double x : point)
        if (!std::isfinite(x) || x < -tol)
            return false;
    for (const auto& ineq : poly.inequalities) {
        double lhs = 0.0;
        for (std::size_t n = 0; n < point.size(); ++n)
            lhs += static_cast<double>(ineq.coeffs[n]) * point[n];
        if (lhs > static_cast<double>(ineq.rhs) + tol)
            return false;
    }
    return true;
}

bool contains(const DofPolytope& poly, std::span<const std::int64_t> point)
{
    check_dimension(poly, point.size());
    for (std::int64_t x : point)
        if (x < 0)
            return false;
    for (const auto& ineq : poly.inequalities) {
        std::int64_t lhs = 0;
        for (std::size_t n = 0; n < point.size(); ++n)
            lhs += ineq.coeffs[n] * point[n];
        if (lhs > ineq.rhs)
            return false;
    }
    return true;
}

DofPoint greedy_allocate(const Topology& topology, const MessageSet& messages, const std::vector<std::size_t>& order)
{
    topology.validate();
    check_messages(topology, messages);
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t n = 0; n < sorted.size(); ++n)
        if (sorted[n] != n)
            throw PreconditionError("greedy_allocate: order is not a permutation of the message indices");
    if (sorted.size() != messages.size())
        throw PreconditionError("greedy_allocate: order is not a permutation of the message indices");

    std::vector<std::int64_t> dst_left(static_cast<std::size_t>(topology.layer_size(topology.hops)));
    std::vector<std::int64_t> src_left(static_cast<std::size_t>(topology.layer_size(0)));
    for (std::size_t j = 0; j < dst_left.size(); ++j)
        dst_left[j] = topology.antennas_at(topology.hops, static_cast<int>(j));
    for (std::size_t i = 0; i < src_left.size(); ++i)
        src_left[i] = topology.antennas_at(0, static_cast<int>(i));
    std::int64_t total_left = layer_cap(topology);

    DofPoint d(messages.size(), 0);
    for (std::size_t idx : order) {
        const Message& msg = messages[idx];
        auto& dl = dst_left[static_cast<std::size_t>(msg.destination - 1)];
        auto& sl = src_left[static_cast<std::size_t>(msg.source - 1)];
        const std::int64_t v = std::min({dl, sl, total_left});
        d[idx] = v;
        dl -= v;
        sl -= v;
        total_left -= v;
    }
    return d;
}

std::vector<DofPoint> corner_points(const DofPolytope& poly, const Topology& topology)
{
    std::vector<DofPoint> corners;
    if (poly.family == RegionFamily::Basic) {
        const std::size_t k = poly.dimension();
        const auto ones = static_cast<std::size_t>(std::min<int>(topology.min_layer_size(), static_cast<int>(k)));
        // every arrangement of `ones` ones among k coordinates, in lexicographically descending order
        DofPoint p(k, 0);
        std::fill(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(ones), 1);
        do {
            corners.push_back(p);
        } while (std::prev_permutation(p.begin(), p.end()));
        return corners;
    }

    if (poly.messages.size() > 8)
        throw PreconditionError("corner_points: at most 8 messages are supported, got " +
                                std::to_string(poly.messages.size()));
    std::vector<std::size_t> order(poly.messages.size());
    std::iota(order.begin(), order.end(), 0);
    std::set<DofPoint> unique;
    do {
        unique.insert(greedy_allocate(topology, poly.messages, order));
    } while (std::next_permutation(order.begin(), order.end()));
    corners.assign(unique.rbegin(), unique.rend());
    return corners;
}

void VirtualPairing::verify(const Topology& topology) const
{
    const int last = topology.hops;
    std::set<std::pair<int, int>> used_src;
    std::set<std::pair<int, int>> used_dst;
    std::int64_t total = 0;
    for (const auto& vp : pairs) {
        if (vp.count < 0)
            throw PreconditionError("virtual pair " + message_label(vp.message) + " has a negative count");
        if (static_cast<std::int64_t>(vp.source_antennas.size()) != vp.count ||
            static_cast<std::int64_t>(vp.destination_antennas.size()) != vp.count)
            throw PreconditionError("virtual pair " + message_label(vp.message) +
                                    " has antenna lists that do not match its count");
        const int src_cap = topology.antennas_at(0, vp.message.source - 1);
        const int dst_cap = topology.antennas_at(last, vp.message.destination - 1);
        for (int a : vp.source_antennas)
            if (a < 1 || a > src_cap || !used_src.insert({vp.message.source, a}).second)
                throw PreconditionError("source antenna " + std::to_string(a) + " of node " +
                                        std::to_string(vp.message.source) + " is invalid or reused");
        for (int a : vp.destination_antennas)
            if (a < 1 || a > dst_cap || !used_dst.insert({vp.message.destination, a}).second)
                throw PreconditionError("destination antenna " + std::to_string(a) + " of node " +
                                        std::to_string(vp.message.destination) + " is invalid or reused");
        total += vp.count;
    }
    if (relay_layers.size() != static_cast<std::size_t>(std::max(0, last - 1)))
        throw PreconditionError("expected one antenna selection per relay layer");
    for (std::size_t r = 0; r < relay_layers.size(); ++r) {
        const int layer = static_cast<int>(r) + 1;
        const auto& sel = relay_layers[r];
        if (static_cast<std::int64_t>(sel.size()) != total)
            throw PreconditionError("relay layer " + std::to_string(layer + 1) + " selects " +
                                    std::to_string(sel.size()) + " antennas, expected " + std::to_string(total));
        std::set<AntennaRef> seen;
        for (const auto& ref : sel) {
            if (ref.node < 1 || ref.node > topology.layer_size(layer) || ref.antenna < 1 ||
                ref.antenna > topology.antennas_at(layer, ref.node - 1) || !seen.insert(ref).second)
                throw PreconditionError("relay layer " + std::to_string(layer + 1) +
                                        " has an invalid or repeated antenna");
        }
    }
}

VirtualPairing build_virtual_pairs(const Topology& topology, const MessageSet& messages,
                                   std::span<const double> allocation)
{
    const DofPolytope poly = region_general(topology, messages);
    check_dimension(poly, allocation.size());
    DofPoint d(allocation.size());
    for (std::size_t n = 0; n < allocation.size(); ++n) {
        const double r = std::round(allocation[n]);
        if (!std::isfinite(allocation[n]) || std::abs(allocation[n] - r) > 1e-9)
            throw PreconditionError("build_virtual_pairs: allocation entry " + poly.labels[n] + " is not integral");
        d[n] = static_cast<std::int64_t>(r);
    }
    if (!contains(poly, std::span<const std::int64_t>(d)))
        throw PreconditionError("build_virtual_pairs: allocation lies outside the DoF region");

    const int last = topology.hops;
    std::vector<int> next_src(static_cast<std::size_t>(topology.layer_size(0)), 1);
    std::vector<int> next_dst(static_cast<std::size_t>(topology.layer_size(last)), 1);
    VirtualPairing out;
    std::int64_t total = 0;
    for (std::size_t n = 0; n < messages.size(); ++n) {
        VirtualPair vp;
        vp.message = messages[n];
        vp.count = d[n];
        int& s = next_src[static_cast<std::size_t>(vp.message.source - 1)];
        int& t = next_dst[static_cast<std::size_t>(vp.message.destination - 1)];
        for (std::int64_t c = 0; c < vp.count; ++c) {
            vp.source_antennas.push_back(s++);
            vp.destination_antennas.push_back(t++);
        }
        total += vp.count;
        out.pairs.push_back(std::move(vp));
    }
    for (int layer = 1; layer < last; ++layer) {
        std::vector<AntennaRef> sel;
        for (int node = 1; node <= topology.layer_size(layer) && static_cast<std::int64_t>(sel.size()) < total; ++node)
            for (int a = 1; a <= topology.antennas_at(layer, node - 1) && static_cast<std::int64_t>(sel.size()) < total;
                 ++a)
                sel.push_back({node, a});
        out.relay_layers.push_back(std::move(sel));
    }
    out.verify(topology);
    return out;
}

std::vector<std::pair<double, double>> slice_boundary(const DofPolytope& poly, std::size_t a, std::size_t b)
{
    if (a == b || a >= poly.dimension() || b >= poly.dimension())
        throw PreconditionError("slice_boundary: need two distinct coordinates inside the region");

    struct Line
    {
        double alpha, beta, rhs;
    };
    std::vector<Line> lines{{-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}};
    for (const auto& ineq : poly.inequalities) {
        const auto alpha = static_cast<double>(ineq.coeffs[a]);
        const auto beta = static_cast<double>(ineq.coeffs[b]);
        if (alpha != 0.0 || beta != 0.0)
            lines.push_back({alpha, beta, static_cast<double>(ineq.rhs)});
    }
    const auto feasible = [&](double x, double y) {
        for (const auto& l : lines)
            if (l.alpha * x + l.beta * y > l.rhs + 1e-9)
                return false;
        return true;
    };

    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const double det = lines[i].alpha * lines[j].beta - lines[j].alpha * lines[i].beta;
            if (det == 0.0)
                continue;
            const double x = (lines[i].rhs * lines[j].beta - lines[j].rhs * lines[i].beta) / det;
            const double y = (lines[i].alpha * lines[j].rhs - lines[j].alpha * lines[i].rhs) / det;
            if (!feasible(x, y))
                continue;
            const bool dup = std::any_of(pts.begin(), pts.end(), [&](const auto& p) {
                return std::abs(p.first - x) < 1e-9 && std::abs(p.second - y) < 1e-9;
            });
            if (!dup)
                pts.emplace_back(x + 0.0, y + 0.0);
        }
    }
    const bool bounded_x = std::any_of(lines.begin() + 2, lines.end(), [](const Line& l) { return l.alpha > 0.0; });
    const bool bounded_y = std::any_of(lines.begin() + 2, lines.end(), [](const Line& l) { return l.beta > 0.0; });
    if (!bounded_x || !bounded_y)
        throw PreconditionError("slice_boundary: the slice is unbounded");

    double cx = 0.0;
    double cy = 0.0;
    for (const auto& p : pts) {
        cx += p.first;
        cy += p.second;
    }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    std::sort(pts.begin(), pts.end(), [&](const auto& p, const auto& q) {
        return std::atan2(p.second - cy, p.first - cx) < std::atan2(q.second - cy, q.first - cx);
    });
    const auto origin = std::find_if(pts.begin(), pts.end(), [](const auto& p) {
        return std::abs(p.first) < 1e-9 && std::abs(p.second) < 1e-9;
    });
    if (origin != pts.end())
        std::rotate(pts.begin(), origin, pts.end());
    return pts;
}

} // namespace afrelay
