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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afrelay/common.hpp"

namespace afrelay {

enum class DistributionKind
{
    ComplexGaussian, ///< CN(0,1), unit variance, circularly symmetric
    Isotropic,       ///< user-supplied radial law
};

/// Scalar law of one channel coefficient.
///
/// Only isotropic laws are representable: the density is a function of |a|
/// alone and the radial log-density must be strictly decreasing. The pairing
/// maps rely on both properties for the uniqueness of their scale constants.
class ChannelDistribution
{
  public:
    using RadialLogPdf = std::function<double(double)>;
    using Sampler = std::function<Complex(Rng&)>;

    static ChannelDistribution complex_gaussian();

    /// Custom isotropic law. `radial_log_pdf(r)` is log p(a) for |a| = r, in nats.
    static ChannelDistribution isotropic(std::string name, RadialLogPdf radial_log_pdf, Sampler sampler);

    DistributionKind kind() const noexcept { return kind_; }
    bool is_gaussian() const noexcept { return kind_ == DistributionKind::ComplexGaussian; }
    const std::string& name() const noexcept { return name_; }

    /// Natural-log density of a single coefficient.
    double log_pdf(Complex a) const;

    /// One coefficient drawn from the law.
    Complex sample(Rng& rng) const;

  private:
    ChannelDistribution() = default;

    DistributionKind kind_ = DistributionKind::ComplexGaussian;
    std::string name_;
    RadialLogPdf radial_;
    Sampler sampler_;
};

/// Layered network shape: M hops, M+1 layers, optional antenna counts per node.
struct Topology
{
    int hops = 2;                            ///< M >= 2
    std::vector<int> layer_sizes;            ///< K_1 .. K_{M+1}
    std::vector<std::vector<int>> antennas;  ///< [layer][node]; empty means one antenna everywhere

    static Topology uniform(int hops, int k);

    /// Throws ConfigError when the shape is inconsistent.
    void validate() const;

    int layer_size(int layer) const { return layer_sizes.at(static_cast<std::size_t>(layer)); }
    int antennas_at(int layer, int node) const;
    int layer_antenna_total(int layer) const;
    int min_layer_size() const;
    bool single_antenna() const;
    /// True when every layer has the same node count.
    bool is_uniform() const;
};

struct HopRealization
{
    int hop = 1;
    std::int64_t time = 1;
    CMatrix matrix;
};

/// rows x cols matrix of i.i.d. draws from `dist`.
CMatrix sample_hop_matrix(const ChannelDistribution& dist, int rows, int cols, Rng& rng);

/// Sum of per-entry log-densities (nats). Throws DomainError on a non-finite entry.
double log_pdf_matrix(const ChannelDistribution& dist, const CMatrix& h);

/// Smallest singular value exceeds `tol` times the largest.
bool is_full_rank(const CMatrix& h, double tol = 1e-12);

/// Eigenvalue magnitudes pairwise separated, and bounded away from zero, by `tol * max|lambda|`.
bool has_distinct_eigs(const CMatrix& h, double tol = 1e-9);

} // namespace afrelay
