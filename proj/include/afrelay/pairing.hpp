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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "afrelay/channel.hpp"
#include "afrelay/common.hpp"

namespace afrelay {

/// Square lattice over the 2k^2 real coordinates of a k x k complex matrix.
/// Spacing `delta`, indices limited to [-q, q] on every axis.
struct QuantizerSpec
{
    double delta = 1.0;
    int q = 1;
    int k = 1;

    void validate() const;
    /// Largest representable |real| or |imag| part of a cell center.
    double range() const noexcept { return delta * q; }
};

/// Integer lattice coordinates of a cell; row-major entries, real index then imaginary index.
struct CellIndex
{
    std::vector<std::int32_t> coords;

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct CellIndexHash
{
    std::size_t operator()(const CellIndex& cell) const noexcept;
};

/// Nearest lattice point, rounding half away from zero. nullopt when any
/// index falls outside [-q, q].
std::optional<CellIndex> quantize(const CMatrix& h, const QuantizerSpec& spec);

/// The lattice point delta * coords as a k x k matrix.
CMatrix cell_center(const CellIndex& cell, const QuantizerSpec& spec);

// ---- pdf-matched scale --------------------------------------------------

/// Positive c with  sum log p(c * shape_ij) == sum log p(reference_ij).
///
/// The Gaussian law uses the closed form ||reference||_F / ||shape||_F; every
/// other law goes through solve_c_bisection.
double solve_c(const ChannelDistribution& dist, const CMatrix& reference, const CMatrix& shape);

/// Generic scale solver: geometric bracket expansion from [1e-6, 1e6] followed by
/// bisection on the strictly decreasing log-density. Throws NoSolutionError when
/// the bracket leaves [1e-30, 1e30].
double solve_c_bisection(const ChannelDistribution& dist, const CMatrix& reference, const CMatrix& shape);

// ---- eigen-structure ----------------------------------------------------

struct EigenStructure
{
    CMatrix vectors;        ///< S, eigenvectors as columns
    CVector values;         ///< lambda, strictly decreasing magnitude
    std::vector<int> sign;  ///< v_i = 1 iff real(lambda_i) < 0
    std::vector<int> flip;  ///< w_i = v_K xor v_{K-1} xor ... xor v_{K-i+1}

    /// S diag(lambda) S^{-1}
    CMatrix reconstruct() const;
};

/// Eigen-decomposition with magnitudes sorted in decreasing order.
/// Throws DegenerateInputError on a magnitude tie within `tol * max|lambda|`.
EigenStructure eig_ordered(const CMatrix& h, double tol = 1e-9);

/// Sign bits and cumulative-xor flips for the given eigenvalue order.
void assign_sign_bits(EigenStructure& eig);

// ---- pairing maps -------------------------------------------------------

enum class PairingScheme
{
    TwoHop,
    ThreeHop,
};

/// Output of the two-hop map F or the three-hop pair (F1, F2).
///
/// `targets[m]` is the matrix paired with H at hop m+2 and `scales[m]` its
/// pdf-matching constant. The product F H (or F2 F1 H) should be diagonal.
struct PairingMap
{
    PairingScheme scheme = PairingScheme::TwoHop;
    std::vector<CMatrix> targets;
    std::vector<double> scales;
    CVector product_diag;
    double residual = 0.0;            ///< Frobenius norm of the off-diagonal part of the product
    std::optional<EigenStructure> eig; ///< three-hop only

    /// c for two hops, c1 * c2 for three.
    double product_scale() const;
    const CMatrix& target(std::size_t i = 0) const { return targets.at(i); }
};

/// F(H) = c(H) H^{-1}. Throws NumericError when H is not full rank.
PairingMap map_two_hop(const ChannelDistribution& dist, const CMatrix& h);

/// F1(H) = c1 S Lambda1 S^{-1}, F2(H) = c2 S Lambda2 S^{-1} with the flips
/// (-1)^{w_i} applied to lambda_i and lambda_i^{-2} respectively.
PairingMap map_three_hop(const ChannelDistribution& dist, const CMatrix& h, double tol = 1e-9);

/// Same as map_three_hop but built from a caller-supplied eigen-structure of `h`.
PairingMap map_three_hop(const ChannelDistribution& dist, const CMatrix& h, const EigenStructure& eig);

/// G belongs to the second-hop set paired with `cell` iff F(G) quantizes to `cell`
/// (F is an involution, so this is membership in the image of the cell).
bool cell_matches_second_hop(const ChannelDistribution& dist, const CMatrix& g, const CellIndex& cell,
                             const QuantizerSpec& spec);

} // namespace afrelay
