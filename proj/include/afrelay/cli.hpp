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

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "afrelay/dofregion.hpp"

namespace afrelay::cli {

using Json = nlohmann::ordered_json;

/// Fully resolved invocation: defaults, then the config file, then flags.
struct RunConfig
{
    std::string command;
    /// Every key of the command's schema, normalized (SNR lists expanded,
    /// topology strings parsed into arrays).
    Json values;

    const Json& at(const std::string& key) const { return values.at(key); }
};

/// Parses `args` (without the program name). Throws ConfigError naming the
/// offending key on unknown keys, type mismatches or constraint violations.
/// Returns false in `proceed` when the arguments only asked for help.
RunConfig parse_config(const std::vector<std::string>& args, std::ostream& out, bool& proceed);

/// Runs a resolved configuration. Returns 0 on success, 1 on a validation
/// error, 2 on a numeric failure. Data goes to `out` or to files, diagnostics to `err`.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_config followed by dispatch, mapping every failure onto an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a:b:c" inclusive range, "x,y,z" list or a single number.
std::vector<double> parse_snr_list(const std::string& text);
/// "3,3,3"
std::vector<int> parse_int_list(const std::string& text);
/// "2,2,2;4;2,2,2" one group per layer
std::vector<std::vector<int>> parse_antennas(const std::string& text);
/// "1:1,2:2" as destination:source
MessageSet parse_messages(const std::string& text);

} // namespace afrelay::cli
