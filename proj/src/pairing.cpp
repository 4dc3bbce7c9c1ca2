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

#include "afrelay/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace afrelay {

namespace {

double off_diagonal_norm(const CMatrix& m)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j)
                acc += std::norm(m(i, j));
    return std::sqrt(acc);
}

CMatrix checked_inverse(const CMatrix& h, const char* what)
{
    if (!is_full_rank(h))
        throw NumericError(std::string(what) + ": matrix is not full rank");
    return h.partialPivLu().inverse();
}

} // namespace

void QuantizerSpec::validate() const
{
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw ConfigError("delta", "quantization interval must be positive and finite");
    if (q < 1)
        throw ConfigError("q", "grid half-extent must be >= 1");
    if (k < 1)
        throw ConfigError("k", "matrix dimension must be >= 1");
}

std::size_t CellIndexHash::operator()(const CellIndex& cell) const noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int32_t c : cell.coords) {
        h ^= static_cast<std::uint32_t>(c);
        h *= 0x100000001b3ULL;
        h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
}

std::optional<CellIndex> quantize(const CMatrix& h, const QuantizerSpec& spec)
{
    if (h.rows() != spec.k || h.cols() != spec.k)
        throw PreconditionError("quantize: matrix shape does not match quantizer dimension");
    CellIndex cell;
    cell.coords.reserve(static_cast<std::size_t>(2 * spec.k * spec.k));
    const double limit = static_cast<double>(spec.q);
    for (int i = 0; i < spec.k; ++i)
        for (int j = 0; j < spec.k; ++j) {
            for (double part : {h(i, j).real(), h(i, j).imag()}) {
                const double idx = std::round(part / spec.delta);
                if (!(std::abs(idx) <= limit))
                    return std::nullopt;
                cell.coords.push_back(static_cast<std::int32_t>(idx));
            }
        }
    return cell;
}

CMatrix cell_center(const CellIndex& cell, const QuantizerSpec& spec)
{
    if (cell.coords.size() != static_cast<std::size_t>(2 * spec.k * spec.k))
        throw PreconditionError("cell_center: coordinate count does not match quantizer");
    CMatrix h(spec.k, spec.k);
    std::size_t n = 0;
    for (int i = 0; i < spec.k; ++i)
        for (int j = 0; j < spec.k; ++j) {
            const double re = spec.delta * cell.coords[n++];
            const double im = spec.delta * cell.coords[n++];
            h(i, j) = Complex(re, im);
        }
    return h;
}

// ---- scale solver -------------------------------------------------------

double solve_c(const ChannelDistribution& dist, const CMatrix& reference, const CMatrix& shape)
{
    if (!dist.is_gaussian())
        return solve_c_bisection(dist, reference, shape);
    const double shape_sq = shape.squaredNorm();
    if (!(shape_sq > 0.0))
        throw PreconditionError("solve_c: shape has no nonzero entry");
    if (!std::isfinite(shape_sq) || !std::isfinite(reference.squaredNorm()))
        throw DomainError("solve_c: non-finite input");
    const double c = std::sqrt(reference.squaredNorm() / shape_sq);
    if (!(c > 0.0))
        throw NoSolutionError("solve_c: reference is the zero matrix");
    return c;
}

double solve_c_bisection(const ChannelDistribution& dist, const CMatrix& reference, const CMatrix& shape)
{
    if (!(shape.cwiseAbs().maxCoeff() > 0.0))
        throw PreconditionError("solve_c: shape has no nonzero entry");
    const double target = log_pdf_matrix(dist, reference);
    auto g = [&](double c) { return log_pdf_matrix(dist, c * shape); };

    constexpr double floor_c = 1e-30;
    constexpr double ceil_c = 1e30;
    double lo = 1e-6;
    double hi = 1e6;
    while (g(lo) < target) {
        lo /= 10.0;
        if (lo < floor_c)
            throw NoSolutionError("solve_c: bracket expansion fell below 1e-30");
    }
    while (g(hi) > target) {
        hi *= 10.0;
        if (hi > ceil_c)
            throw NoSolutionError("solve_c: bracket expansion exceeded 1e30");
    }

    // g is strictly decreasing: keep g(lo) >= target >= g(hi).
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const double value = g(mid);
        if (value == target)
            return mid;
        if (value > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi)
            break;
    }
    return 0.5 * (lo + hi);
}

// ---- eigen-structure ----------------------------------------------------

CMatrix EigenStructure::reconstruct() const
{
    return vectors * values.asDiagonal() * vectors.partialPivLu().inverse();
}

void assign_sign_bits(EigenStructure& eig)
{
    const auto k = static_cast<std::size_t>(eig.values.size());
    eig.sign.assign(k, 0);
    eig.flip.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i)
        eig.sign[i] = eig.values(static_cast<Eigen::Index>(i)).real() < 0.0 ? 1 : 0;
    // w_1 = v_K, w_i = w_{i-1} xor v_{K-i+1}
    int acc = 0;
    for (std::size_t i = 0; i < k; ++i) {
        acc ^= eig.sign[k - 1 - i];
        eig.flip[i] = acc;
    }
}

EigenStructure eig_ordered(const CMatrix& h, double tol)
{
    if (h.rows() != h.cols())
        throw PreconditionError("eig_ordered: matrix must be square");
    Eigen::ComplexEigenSolver<CMatrix> solver(h, true);
    if (solver.info() != Eigen::Success)
        throw NumericError("eig_ordered: eigendecomposition failed");

    const Eigen::Index k = h.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto& lam = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(lam(a)) > std::abs(lam(b)); });

    EigenStructure eig;
    eig.vectors.resize(k, k);
    eig.values.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        eig.values(i) = lam(order[static_cast<std::size_t>(i)]);
        eig.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    }

    const double top = std::abs(eig.values(0));
    if (!(std::abs(eig.values(k - 1)) > tol * top))
        throw DegenerateInputError("eig_ordered: zero eigenvalue");
    for (Eigen::Index i = 1; i < k; ++i)
        if (!(std::abs(eig.values(i - 1)) - std::abs(eig.values(i)) > tol * top))
            throw DegenerateInputError("eig_ordered: eigenvalue magnitudes tie");

    assign_sign_bits(eig);
    return eig;
}

// ---- maps ---------------------------------------------------------------

double PairingMap::product_scale() const
{
    double p = 1.0;
    for (double s : scales)
        p *= s;
    return p;
}

PairingMap map_two_hop(const ChannelDistribution& dist, const CMatrix& h)
{
    if (h.rows() != h.cols())
        throw PreconditionError("map_two_hop: matrix must be square");
    const CMatrix inv = checked_inverse(h, "map_two_hop");
    const double c = solve_c(dist, h, inv);

    PairingMap map;
    map.scheme = PairingScheme::TwoHop;
    map.targets.push_back(c * inv);
    map.scales.push_back(c);
    const CMatrix product = map.targets[0] * h;
    map.product_diag = product.diagonal();
    map.residual = off_diagonal_norm(product);
    return map;
}

PairingMap map_three_hop(const ChannelDistribution& dist, const CMatrix& h, double tol)
{
    return map_three_hop(dist, h, eig_ordered(h, tol));
}

PairingMap map_three_hop(const ChannelDistribution& dist, const CMatrix& h, const EigenStructure& eig)
{
    const Eigen::Index k = h.rows();
    if (h.cols() != k || eig.values.size() != k || eig.vectors.rows() != k || eig.vectors.cols() != k)
        throw PreconditionError("map_three_hop: eigen-structure does not match the matrix");
    if (eig.flip.size() != static_cast<std::size_t>(k))
        throw PreconditionError("map_three_hop: sign bits not assigned");

    CVector lam1(k);
    CVector lam2(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double s = eig.flip[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
        const Complex l = eig.values(i);
        lam1(i) = s * l;
        lam2(i) = s / (l * l);
    }
    const auto lu = eig.vectors.partialPivLu();
    const CMatrix s_inv = lu.inverse();
    const CMatrix shape1 = eig.vectors * lam1.asDiagonal() * s_inv;
    const CMatrix shape2 = eig.vectors * lam2.asDiagonal() * s_inv;
    const double c1 = solve_c(dist, h, shape1);
    const double c2 = solve_c(dist, h, shape2);

    PairingMap map;
    map.scheme = PairingScheme::ThreeHop;
    map.targets = {c1 * shape1, c2 * shape2};
    map.scales = {c1, c2};
    const CMatrix product = map.targets[1] * map.targets[0] * h;
    map.product_diag = product.diagonal();
    map.residual = off_diagonal_norm(product);
    map.eig = eig;
    return map;
}

bool cell_matches_second_hop(const ChannelDistribution& dist, const CMatrix& g, const CellIndex& cell,
                             const QuantizerSpec& spec)
{
    const auto image = quantize(map_two_hop(dist, g).target(), spec);
    return image && *image == cell;
}

} // namespace afrelay
