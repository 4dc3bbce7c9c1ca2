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

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace afrelay {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Random engine used everywhere. Each thread owns its own instance.
using Rng = std::mt19937_64;

/// Counter-based seed split: stream `index` of master seed `master`.
/// Uses the splitmix64 finalizer so neighbouring indices decorrelate.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---- error types --------------------------------------------------------

/// Non-finite or otherwise invalid numeric input.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// A numeric routine failed (decomposition, inversion, rejection budget).
class NumericError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Root bracket could not be established for the scale solver.
class NoSolutionError : public NumericError
{
  public:
    using NumericError::NumericError;
};

/// Input lies on a measure-zero set the maps are not defined on (eigenvalue ties).
class DegenerateInputError : public NumericError
{
  public:
    using NumericError::NumericError;
};

/// Caller violated a documented precondition.
class PreconditionError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration. `key()` names the offending key path.
class ConfigError : public std::invalid_argument
{
  public:
    ConfigError(std::string key, const std::string& message)
        : std::invalid_argument(key + ": " + message), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

} // namespace afrelay
