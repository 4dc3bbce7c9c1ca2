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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afrelay/channel.hpp"

namespace afrelay {

/// W_ji: message from source i to destination j, both 1-based.
struct Message
{
    int destination = 1;
    int source = 1;

    friend bool operator==(const Message&, const Message&) = default;
    friend auto operator<=>(const Message&, const Message&) = default;
};

using MessageSet = std::vector<Message>;

/// coeffs . d <= rhs
struct Inequality
{
    std::vector<std::int64_t> coeffs;
    std::int64_t rhs = 0;
    std::string label;
};

enum class RegionFamily
{
    Basic,    ///< one message per pair, single antennas
    General,  ///< multi-antenna nodes, arbitrary message set
};

/// Polytope {d >= 0 : A d <= b} with integer A, b.
struct DofPolytope
{
    RegionFamily family = RegionFamily::Basic;
    std::vector<std::string> labels;
    std::vector<Inequality> inequalities;
    MessageSet messages;  ///< General family only

    std::size_t dimension() const noexcept { return labels.size(); }
};

using DofPoint = std::vector<std::int64_t>;

/// Per-pair caps d_i <= 1 and the sum cap min_m K_m.
/// Throws PreconditionError for multi-antenna topologies or K_1 != K_{M+1}.
DofPolytope region_basic(const Topology& topology);

/// Destination caps, source caps and the layer cap min_m sum_i L_{i,m}.
DofPolytope region_general(const Topology& topology, const MessageSet& messages);

/// Membership with tolerance; throws PreconditionError on a dimension mismatch.
bool contains(const DofPolytope& poly, std::span<const double> point, double tol = 1e-9);

/// Exact membership for integral points.
bool contains(const DofPolytope& poly, std::span<const std::int64_t> point);

/// Corner points. Basic family: 0/1 vectors summing to min(min_m K_m, K).
/// General family: distinct greedy outcomes over every message order
/// (card(W_g) <= 8, PreconditionError beyond).
std::vector<DofPoint> corner_points(const DofPolytope& poly, const Topology& topology);

/// Assigns each message, in `order`, the largest DoF the three constraint families allow.
/// `order` holds indices into `messages`.
DofPoint greedy_allocate(const Topology& topology, const MessageSet& messages, const std::vector<std::size_t>& order);

struct AntennaRef
{
    int node = 1;     ///< 1-based node index in its layer
    int antenna = 1;  ///< 1-based antenna index at that node

    friend bool operator==(const AntennaRef&, const AntennaRef&) = default;
    friend auto operator<=>(const AntennaRef&, const AntennaRef&) = default;
};

struct VirtualPair
{
    Message message;
    std::int64_t count = 0;
    std::vector<int> source_antennas;       ///< at node `message.source` of layer 1
    std::vector<int> destination_antennas;  ///< at node `message.destination` of layer M+1
};

struct VirtualPairing
{
    std::vector<VirtualPair> pairs;
    std::vector<std::vector<AntennaRef>> relay_layers;  ///< layers 2..M

    /// Throws PreconditionError when a certificate invariant is violated.
    void verify(const Topology& topology) const;
};

/// First-fit antenna assignment realizing an integral allocation.
VirtualPairing build_virtual_pairs(const Topology& topology, const MessageSet& messages,
                                   std::span<const double> allocation);

/// Boundary polygon of the 2-D slice through coordinates (a, b), all others zero.
/// Vertices are listed counter-clockwise starting from the origin.
std::vector<std::pair<double, double>> slice_boundary(const DofPolytope& poly, std::size_t a, std::size_t b);

/// Message labels, e.g. "d_21" for W_21.
std::string message_label(const Message& msg);

} // namespace afrelay
