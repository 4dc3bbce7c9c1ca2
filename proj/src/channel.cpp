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

#include "afrelay/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace afrelay {

ChannelDistribution ChannelDistribution::complex_gaussian()
{
    ChannelDistribution d;
    d.kind_ = DistributionKind::ComplexGaussian;
    d.name_ = "gaussian";
    return d;
}

ChannelDistribution ChannelDistribution::isotropic(std::string name, RadialLogPdf radial_log_pdf, Sampler sampler)
{
    if (!radial_log_pdf || !sampler)
        throw PreconditionError("isotropic distribution needs a radial log-pdf and a sampler");
    ChannelDistribution d;
    d.kind_ = DistributionKind::Isotropic;
    d.name_ = std::move(name);
    d.radial_ = std::move(radial_log_pdf);
    d.sampler_ = std::move(sampler);
    return d;
}

double ChannelDistribution::log_pdf(Complex a) const
{
    if (kind_ == DistributionKind::ComplexGaussian)
        return -std::log(std::numbers::pi) - std::norm(a);
    return radial_(std::abs(a));
}

Complex ChannelDistribution::sample(Rng& rng) const
{
    if (kind_ == DistributionKind::ComplexGaussian) {
        std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
        const double re = normal(rng);
        const double im = normal(rng);
        return {re, im};
    }
    return sampler_(rng);
}

// ---- Topology -----------------------------------------------------------

Topology Topology::uniform(int hops, int k)
{
    Topology t;
    t.hops = hops;
    t.layer_sizes.assign(static_cast<std::size_t>(hops + 1), k);
    return t;
}

void Topology::validate() const
{
    if (hops < 2)
        throw ConfigError("m", "hop count must be >= 2");
    if (layer_sizes.size() != static_cast<std::size_t>(hops + 1))
        throw ConfigError("layers", "expected " + std::to_string(hops + 1) + " layer sizes for M=" +
                                        std::to_string(hops));
    for (std::size_t m = 0; m < layer_sizes.size(); ++m)
        if (layer_sizes[m] < 1)
            throw ConfigError("layers[" + std::to_string(m) + "]", "layer size must be >= 1");
    if (!antennas.empty()) {
        if (antennas.size() != layer_sizes.size())
            throw ConfigError("antennas", "need one antenna list per layer");
        for (std::size_t m = 0; m < antennas.size(); ++m) {
            if (antennas[m].size() != static_cast<std::size_t>(layer_sizes[m]))
                throw ConfigError("antennas[" + std::to_string(m) + "]", "need one antenna count per node");
            for (std::size_t i = 0; i < antennas[m].size(); ++i)
                if (antennas[m][i] < 1)
                    throw ConfigError("antennas[" + std::to_string(m) + "][" + std::to_string(i) + "]",
                                      "antenna count must be >= 1");
        }
    }
}

int Topology::antennas_at(int layer, int node) const
{
    if (antennas.empty())
        return 1;
    return antennas.at(static_cast<std::size_t>(layer)).at(static_cast<std::size_t>(node));
}

int Topology::layer_antenna_total(int layer) const
{
    if (antennas.empty())
        return layer_size(layer);
    const auto& row = antennas.at(static_cast<std::size_t>(layer));
    int total = 0;
    for (int a : row)
        total += a;
    return total;
}

int Topology::min_layer_size() const
{
    return *std::min_element(layer_sizes.begin(), layer_sizes.end());
}

bool Topology::single_antenna() const
{
    for (const auto& row : antennas)
        for (int a : row)
            if (a != 1)
                return false;
    return true;
}

bool Topology::is_uniform() const
{
    return std::adjacent_find(layer_sizes.begin(), layer_sizes.end(), std::not_equal_to<>()) == layer_sizes.end();
}

// ---- operations ---------------------------------------------------------

CMatrix sample_hop_matrix(const ChannelDistribution& dist, int rows, int cols, Rng& rng)
{
    if (rows < 1 || cols < 1)
        throw PreconditionError("sample_hop_matrix: dimensions must be >= 1");
    CMatrix h(rows, cols);
    if (dist.is_gaussian()) {
        std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                const double re = normal(rng);
                const double im = normal(rng);
                h(i, j) = Complex(re, im);
            }
        return h;
    }
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            h(i, j) = dist.sample(rng);
    return h;
}

double log_pdf_matrix(const ChannelDistribution& dist, const CMatrix& h)
{
    double total = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            const Complex a = h(i, j);
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw DomainError("log_pdf_matrix: non-finite entry");
            total += dist.log_pdf(a);
        }
    return total;
}

bool is_full_rank(const CMatrix& h, double tol)
{
    if (h.rows() != h.cols())
        throw PreconditionError("is_full_rank: matrix must be square");
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(h).singularValues();
    const double largest = s.maxCoeff();
    const double smallest = s.minCoeff();
    return largest > 0.0 && smallest > tol * largest;
}

bool has_distinct_eigs(const CMatrix& h, double tol)
{
    if (h.rows() != h.cols())
        throw PreconditionError("has_distinct_eigs: matrix must be square");
    Eigen::ComplexEigenSolver<CMatrix> solver(h, false);
    if (solver.info() != Eigen::Success)
        throw NumericError("has_distinct_eigs: eigendecomposition failed");
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(h.rows()));
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        mags.push_back(std::abs(solver.eigenvalues()(i)));
    std::sort(mags.begin(), mags.end());
    const double top = mags.back();
    if (!(mags.front() > tol * top))
        return false;
    for (std::size_t i = 1; i < mags.size(); ++i)
        if (!(mags[i] - mags[i - 1] > tol * top))
            return false;
    return true;
}

} // namespace afrelay
