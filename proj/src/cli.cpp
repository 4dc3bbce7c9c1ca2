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

#include "afrelay/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "afrelay/afsim.hpp"
#include "afrelay/pairing.hpp"
#include "afrelay/rates.hpp"

namespace afrelay::cli {

namespace fs = std::filesystem;

namespace {

enum class Kind
{
    Int,
    UInt,
    Real,
    Bool,
    String,
    RealList,
    IntList,
    IntMatrix,
    Messages,
};

struct Field
{
    std::string key;
    Kind kind;
    Json fallback;  ///< null means optional and unset
    std::string help;
};

const std::vector<std::string> kCommands = {"rates", "cutset", "sweep", "simulate", "dof", "pairing-check"};

const std::map<std::string, std::string> kDescriptions = {
    {"rates", "Monte Carlo achievable rates per pair"},
    {"cutset", "cut-set sum-rate upper bound"},
    {"sweep", "achievable sum rate against the cut-set bound over an SNR grid"},
    {"simulate", "block Markov relaying simulation"},
    {"dof", "DoF region inequalities, corner points and 2-D slices"},
    {"pairing-check", "pairing map residuals and log-density gaps"},
};

std::string flag_name(const std::string& key)
{
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

std::vector<Field> schema(const std::string& command)
{
    const bool sim = command == "simulate";
    const bool dof = command == "dof";
    std::vector<Field> f = {
        {"seed", Kind::UInt, 1, "master seed"},
        {"samples", Kind::Int, sim ? 0 : (command == "pairing-check" ? 1000 : 10000),
         sim ? "calibration samples (0 selects max(1e6, 100 n_B))" : "Monte Carlo samples"},
        {"out", Kind::String, "", "output file; standard output when empty"},
        {"format", Kind::String, dof ? "json" : "csv", "csv or json"},
        {"dist", Kind::String, "gaussian", "channel law"},
    };
    if (command == "rates" || command == "sweep" || sim || command == "pairing-check") {
        f.push_back({"k", Kind::Int, 2, "source-destination pairs"});
        f.push_back({"m", Kind::Int, 2, "hops"});
    }
    if (command == "rates" || command == "cutset" || sim)
        f.push_back({"snr_db", Kind::RealList, Json::array({20.0}), "SNR in dB: x, x,y,z or start:stop:step"});
    if (command == "sweep") {
        f.push_back({"snr_db", Kind::RealList, Json::array({0.0, 10.0, 20.0, 30.0, 40.0}), "SNR grid in dB"});
        f.push_back({"plot_data", Kind::String, "", "directory for two-column curve files"});
    }
    if (command == "cutset") {
        f.push_back({"k_tx", Kind::Int, 2, "transmit nodes"});
        f.push_back({"k_rx", Kind::Int, 2, "receive nodes"});
    }
    if (sim) {
        f.push_back({"n_b", Kind::Int, 10000, "sub-block length"});
        f.push_back({"sub_blocks", Kind::Int, 5, "number of sub-blocks B"});
        f.push_back({"delta", Kind::Real, nullptr, "quantizer cell size"});
        f.push_back({"q", Kind::Int, nullptr, "quantizer range in cells"});
        f.push_back({"epsilon", Kind::Real, nullptr, "quota slack"});
        f.push_back({"replicas", Kind::Int, 1, "independent runs with seeds seed, seed+1, ..."});
        f.push_back({"threads", Kind::Int, 1, "worker threads for replicas"});
        f.push_back({"sample_noise", Kind::Bool, false, "measure relay transmit power"});
    }
    if (dof) {
        f.push_back({"preset", Kind::String, "theorem1", "theorem1 or general"});
        f.push_back({"k", Kind::Int, nullptr, "pairs for a uniform topology"});
        f.push_back({"m", Kind::Int, 2, "hops for a uniform topology"});
        f.push_back({"layers", Kind::IntList, nullptr, "node count per layer, e.g. 3,3,3"});
        f.push_back({"antennas", Kind::IntMatrix, nullptr, "antennas per node, layers separated by ';'"});
        f.push_back({"messages", Kind::Messages, nullptr, "destination:source pairs, e.g. 1:1,2:2"});
        f.push_back({"slice", Kind::IntList, nullptr, "two 1-based coordinates for a 2-D boundary"});
    }
    return f;
}

// ---- scalar parsing -----------------------------------------------------

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        parts.push_back(trim(cur));
    if (!s.empty() && s.back() == sep)
        parts.emplace_back();
    return parts;
}

template <class T>
T parse_number(const std::string& text)
{
    const std::string t = trim(text);
    T value{};
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw PreconditionError("'" + text + "' is not a valid number");
    return value;
}

std::string fmt(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

template <class T>
std::string join(const std::vector<T>& v, const std::string& sep)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? sep : "") << v[i];
    return os.str();
}

// ---- value resolution ---------------------------------------------------

Json from_flag(const Field& f, const std::string& text)
{
    try {
        switch (f.kind) {
        case Kind::Int:
            return parse_number<std::int64_t>(text);
        case Kind::UInt:
            return parse_number<std::uint64_t>(text);
        case Kind::Real:
            return parse_number<double>(text);
        case Kind::Bool:
            return true;
        case Kind::String:
            return text;
        case Kind::RealList:
            return parse_snr_list(text);
        case Kind::IntList:
            return parse_int_list(text);
        case Kind::IntMatrix:
            return parse_antennas(text);
        case Kind::Messages: {
            Json arr = Json::array();
            for (const auto& m : parse_messages(text))
                arr.push_back({m.destination, m.source});
            return arr;
        }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(f.key, e.what());
    }
    return nullptr;
}

void expect(bool ok, const std::string& key, const std::string& what)
{
    if (!ok)
        throw ConfigError(key, "expected " + what);
}

Json from_file(const Field& f, const Json& v)
{
    const std::string& key = f.key;
    switch (f.kind) {
    case Kind::Int:
        expect(v.is_number_integer(), key, "an integer");
        return v;
    case Kind::UInt:
        expect(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), key,
               "a non-negative integer");
        return v.get<std::uint64_t>();
    case Kind::Real:
        expect(v.is_number(), key, "a number");
        return v.get<double>();
    case Kind::Bool:
        expect(v.is_boolean(), key, "true or false");
        return v;
    case Kind::String:
        expect(v.is_string(), key, "a string");
        return v;
    case Kind::RealList: {
        if (v.is_number())
            return Json::array({v.get<double>()});
        if (v.is_string())
            return from_flag(f, v.get<std::string>());
        expect(v.is_array(), key, "a number, a range string or an array of numbers");
        Json out = Json::array();
        for (std::size_t i = 0; i < v.size(); ++i) {
            expect(v[i].is_number(), key + "[" + std::to_string(i) + "]", "a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }
    case Kind::IntList: {
        if (v.is_string())
            return from_flag(f, v.get<std::string>());
        expect(v.is_array(), key, "an array of integers");
        for (std::size_t i = 0; i < v.size(); ++i)
            expect(v[i].is_number_integer(), key + "[" + std::to_string(i) + "]", "an integer");
        return v;
    }
    case Kind::IntMatrix: {
        if (v.is_string())
            return from_flag(f, v.get<std::string>());
        expect(v.is_array(), key, "an array of integer arrays");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string ki = key + "[" + std::to_string(i) + "]";
            expect(v[i].is_array(), ki, "an array of integers");
            for (std::size_t j = 0; j < v[i].size(); ++j)
                expect(v[i][j].is_number_integer(), ki + "[" + std::to_string(j) + "]", "an integer");
        }
        return v;
    }
    case Kind::Messages: {
        if (v.is_string())
            return from_flag(f, v.get<std::string>());
        expect(v.is_array(), key, "an array of [destination, source] pairs");
        for (std::size_t i = 0; i < v.size(); ++i)
            expect(v[i].is_array() && v[i].size() == 2 && v[i][0].is_number_integer() &&
                       v[i][1].is_number_integer(),
                   key + "[" + std::to_string(i) + "]", "a [destination, source] pair");
        return v;
    }
    }
    return nullptr;
}

Json read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open '" + path + "'");
    try {
        Json doc = Json::parse(in);
        if (!doc.is_object())
            throw ConfigError("config", "top level must be an object");
        return doc;
    } catch (const Json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
}

// ---- validation ---------------------------------------------------------

std::int64_t get_int(const RunConfig& c, const std::string& key)
{
    return c.at(key).get<std::int64_t>();
}

void require(bool ok, const std::string& key, const std::string& message)
{
    if (!ok)
        throw ConfigError(key, message);
}

Topology dof_topology(const RunConfig& c)
{
    Topology t;
    const Json& layers = c.at("layers");
    const Json& k = c.at("k");
    if (!layers.is_null()) {
        require(layers.size() >= 3, "layers", "need at least three layers (M >= 2)");
        t.layer_sizes = layers.get<std::vector<int>>();
        t.hops = static_cast<int>(t.layer_sizes.size()) - 1;
        if (!k.is_null())
            require(k.get<int>() == t.layer_sizes.front() && k.get<int>() == t.layer_sizes.back(), "k",
                    "must equal the first and last layer sizes");
    } else {
        require(!k.is_null(), "k", "required when layers is not given");
        require(k.get<int>() >= 1, "k", "must be >= 1");
        require(get_int(c, "m") >= 2, "m", "must be >= 2");
        t = Topology::uniform(static_cast<int>(get_int(c, "m")), k.get<int>());
    }
    if (!c.at("antennas").is_null())
        t.antennas = c.at("antennas").get<std::vector<std::vector<int>>>();
    t.validate();
    return t;
}

MessageSet dof_messages(const RunConfig& c, const Topology& t)
{
    MessageSet msgs;
    const Json& m = c.at("messages");
    if (m.is_null()) {
        const int n = std::min(t.layer_size(0), t.layer_size(t.hops));
        for (int i = 1; i <= n; ++i)
            msgs.push_back({i, i});
        return msgs;
    }
    for (const auto& pair : m)
        msgs.push_back({pair[0].get<int>(), pair[1].get<int>()});
    return msgs;
}

void validate(const RunConfig& c)
{
    const std::string& cmd = c.command;
    require(c.at("format") == "csv" || c.at("format") == "json", "format", "must be csv or json");
    require(c.at("dist") == "gaussian", "dist", "only 'gaussian' is available from the command line");
    if (cmd == "simulate")
        require(get_int(c, "samples") >= 0, "samples", "must be >= 0");
    else
        require(get_int(c, "samples") >= 1, "samples", "must be >= 1");
    if (c.values.contains("k") && !c.at("k").is_null())
        require(get_int(c, "k") >= 1, "k", "must be >= 1");
    if (c.values.contains("m") && cmd != "dof") {
        require(get_int(c, "m") >= 2, "m", "must be >= 2");
        if (cmd != "rates")
            require(get_int(c, "m") <= 3, "m", "must be 2 or 3 for " + cmd);
    }
    if (c.values.contains("snr_db")) {
        const Json& s = c.at("snr_db");
        require(!s.empty(), "snr_db", "needs at least one value");
        for (std::size_t i = 0; i < s.size(); ++i)
            require(std::isfinite(s[i].get<double>()), "snr_db[" + std::to_string(i) + "]", "must be finite");
    }
    if (cmd == "cutset") {
        require(get_int(c, "k_tx") >= 1, "k_tx", "must be >= 1");
        require(get_int(c, "k_rx") >= 1, "k_rx", "must be >= 1");
    }
    if (cmd == "simulate") {
        require(c.at("snr_db").size() == 1, "snr_db", "simulate takes a single SNR");
        require(get_int(c, "n_b") >= 2, "n_b", "must be >= 2");
        require(get_int(c, "replicas") >= 1, "replicas", "must be >= 1");
        require(get_int(c, "threads") >= 1, "threads", "must be >= 1");
        if (!c.at("delta").is_null())
            require(c.at("delta").get<double>() > 0.0, "delta", "must be > 0");
        if (!c.at("q").is_null())
            require(get_int(c, "q") >= 1, "q", "must be >= 1");
        if (!c.at("epsilon").is_null()) {
            const double e = c.at("epsilon").get<double>();
            require(e > 0.0 && e < 1.0, "epsilon", "must lie in (0, 1)");
        }
    }
    if (cmd == "dof") {
        require(c.at("preset") == "theorem1" || c.at("preset") == "general", "preset", "must be theorem1 or general");
        const Topology t = dof_topology(c);
        const Json& slice = c.at("slice");
        if (!slice.is_null())
            require(slice.size() == 2 && slice[0] != slice[1] && slice[0].get<int>() >= 1 && slice[1].get<int>() >= 1,
                    "slice", "needs two distinct 1-based coordinates");
        else
            require(c.at("format") == "json", "format", "dof writes JSON unless --slice is given");
        if (c.at("preset") == "general")
            (void)region_general(t, dof_messages(c, t));
        else
            require(c.at("messages").is_null(), "messages", "only the general preset takes a message set");
    }
}

// ---- output -------------------------------------------------------------

Json config_record(const RunConfig& c)
{
    Json rec;
    rec["command"] = c.command;
    for (const auto& [key, value] : c.values.items())
        rec[key] = value;
    return rec;
}

void write_atomic(const fs::path& path, const std::string& body)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("out", "cannot write '" + tmp.string() + "'");
        out << body;
        out.flush();
        if (!out)
            throw ConfigError("out", "write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

void emit(const RunConfig& c, const std::string& body, std::ostream& out)
{
    const std::string path = c.at("out").get<std::string>();
    if (path.empty()) {
        out << body;
        return;
    }
    write_atomic(path, body);
    Json meta;
    meta["artifact"] = fs::path(path).filename().string();
    meta["config"] = config_record(c);
    write_atomic(path + ".meta.json", meta.dump(2) + "\n");
}

/// Rows of string cells rendered as CSV (with a config comment) or JSON.
class Table
{
  public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<Json> row) { rows_.push_back(std::move(row)); }

    std::string render(const RunConfig& c) const
    {
        if (c.at("format") == "json") {
            Json doc;
            doc["config"] = config_record(c);
            doc["rows"] = Json::array();
            for (const auto& r : rows_) {
                Json obj;
                for (std::size_t i = 0; i < header_.size(); ++i)
                    obj[header_[i]] = r[i];
                doc["rows"].push_back(std::move(obj));
            }
            return doc.dump(2) + "\n";
        }
        std::ostringstream os;
        os << "# config: " << config_record(c).dump() << "\n" << join(header_, ",") << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                os << (i ? "," : "");
                if (r[i].is_number_float())
                    os << fmt(r[i].get<double>());
                else if (r[i].is_string())
                    os << r[i].get<std::string>();
                else if (!r[i].is_null())
                    os << r[i].dump();
            }
            os << "\n";
        }
        return os.str();
    }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<Json>> rows_;
};

// ---- commands -----------------------------------------------------------

const ChannelDistribution& gaussian()
{
    static const ChannelDistribution dist = ChannelDistribution::complex_gaussian();
    return dist;
}

std::uint64_t seed_of(const RunConfig& c)
{
    return c.at("seed").get<std::uint64_t>();
}

int cmd_rates(const RunConfig& c, std::ostream& out)
{
    const int k = static_cast<int>(get_int(c, "k"));
    const int m = static_cast<int>(get_int(c, "m"));
    const std::int64_t samples = get_int(c, "samples");
    const std::uint64_t seed = seed_of(c);
    const std::vector<int> segments = m <= 3 ? std::vector<int>{m} : hop_decompose(m);

    Table table({"snr_db", "k", "m", "segment", "scheme", "pair", "rate_bits", "stderr", "samples", "seed",
                 "rejected"});
    for (const auto& s : c.at("snr_db")) {
        const double db = s.get<double>();
        const double p = db_to_linear(db);
        std::vector<RateResult> results;
        for (std::size_t g = 0; g < segments.size(); ++g) {
            const std::uint64_t sg = g == 0 ? seed : derive_seed(seed, g + 1);
            results.push_back(segments[g] == 2 ? rate_two_hop_mc(gaussian(), k, p, samples, sg)
                                               : rate_three_hop_mc(gaussian(), k, p, samples, sg));
            for (int i = 0; i < k; ++i)
                table.add({db, k, m, static_cast<int>(g + 1), results.back().scheme, i + 1,
                           results.back().rate_bits[static_cast<std::size_t>(i)],
                           results.back().stderr_bits[static_cast<std::size_t>(i)], samples, sg,
                           results.back().rejected});
        }
        if (segments.size() > 1) {
            // end-to-end rate of the composed network is the slowest segment
            for (int i = 0; i < k; ++i) {
                const auto worst = std::min_element(results.begin(), results.end(), [&](const auto& a, const auto& b) {
                    return a.rate_bits[static_cast<std::size_t>(i)] < b.rate_bits[static_cast<std::size_t>(i)];
                });
                std::int64_t rejected = 0;
                for (const auto& r : results)
                    rejected += r.rejected;
                table.add({db, k, m, 0, scheme_label(m), i + 1, worst->rate_bits[static_cast<std::size_t>(i)],
                           worst->stderr_bits[static_cast<std::size_t>(i)], samples, seed, rejected});
            }
        }
    }
    emit(c, table.render(c), out);
    return 0;
}

int cmd_cutset(const RunConfig& c, std::ostream& out)
{
    const int k_tx = static_cast<int>(get_int(c, "k_tx"));
    const int k_rx = static_cast<int>(get_int(c, "k_rx"));
    const std::int64_t samples = get_int(c, "samples");
    Table table({"snr_db", "k_tx", "k_rx", "cutset_sum_bits", "stderr", "samples", "seed"});
    for (const auto& s : c.at("snr_db")) {
        const double db = s.get<double>();
        const RateResult r = cutset_sum_upper(gaussian(), k_tx, k_rx, db_to_linear(db), samples, seed_of(c));
        table.add({db, k_tx, k_rx, r.rate_bits[0], r.stderr_bits[0], samples, seed_of(c)});
    }
    emit(c, table.render(c), out);
    return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out)
{
    const auto snr = c.at("snr_db").get<std::vector<double>>();
    const auto rows = gap_table(gaussian(), static_cast<int>(get_int(c, "k")), static_cast<int>(get_int(c, "m")),
                                snr, get_int(c, "samples"), seed_of(c));
    Table table({"snr_db", "k", "m", "scheme", "achievable_sum_bits", "cutset_sum_bits", "gap_bits", "stderr",
                 "samples", "seed"});
    for (const auto& r : rows)
        table.add({r.snr_db, r.k, r.m, r.scheme, r.achievable_sum, r.cutset_sum, r.gap, r.stderr_gap, r.samples,
                   r.seed});
    emit(c, table.render(c), out);

    const std::string dir = c.at("plot_data").get<std::string>();
    if (!dir.empty()) {
        const auto curve = [&](const std::string& name, auto value) {
            std::ostringstream os;
            os << "# snr_db " << name << "\n";
            for (const auto& r : rows)
                os << fmt(r.snr_db) << " " << fmt(value(r)) << "\n";
            write_atomic(fs::path(dir) / (name + ".dat"), os.str());
        };
        curve("achievable_sum_bits", [](const SweepRow& r) { return r.achievable_sum; });
        curve("cutset_sum_bits", [](const SweepRow& r) { return r.cutset_sum; });
        curve("gap_bits", [](const SweepRow& r) { return r.gap; });
    }
    return 0;
}

int cmd_simulate(const RunConfig& c, std::ostream& out)
{
    SimConfig sc;
    const int k = static_cast<int>(get_int(c, "k"));
    sc.topology = Topology::uniform(static_cast<int>(get_int(c, "m")), k);
    sc.power = db_to_linear(c.at("snr_db")[0].get<double>());
    sc.n_b = get_int(c, "n_b");
    sc.sub_blocks = get_int(c, "sub_blocks");
    const ScalingDefaults d = default_scaling(sc.n_b, k);
    sc.quantizer.k = k;
    sc.quantizer.delta = c.at("delta").is_null() ? d.delta : c.at("delta").get<double>();
    sc.quantizer.q = c.at("q").is_null() ? d.q : static_cast<int>(get_int(c, "q"));
    sc.epsilon = c.at("epsilon").is_null() ? d.epsilon : c.at("epsilon").get<double>();
    sc.calibration_samples = get_int(c, "samples");
    sc.sample_noise = c.at("sample_noise").get<bool>();
    sc.seed = seed_of(c);
    sc.validate();

    const std::int64_t n_cal =
        sc.calibration_samples > 0 ? sc.calibration_samples : std::max<std::int64_t>(1'000'000, 100 * sc.n_b);
    sc.calibration = std::make_shared<CellCalibration>(calibrate(sc, n_cal, derive_seed(sc.seed, 0xCA1)));

    std::vector<std::uint64_t> seeds;
    for (std::int64_t r = 0; r < get_int(c, "replicas"); ++r)
        seeds.push_back(sc.seed + static_cast<std::uint64_t>(r));
    const auto reports = run_replicas(sc, seeds, static_cast<unsigned>(get_int(c, "threads")));

    Table table({"seed", "pair", "rate_bits", "mean_sinr_db", "e1", "e2", "utilization"});
    for (const auto& rep : reports)
        for (int i = 0; i < rep.k; ++i)
            table.add({rep.seed, i + 1, rep.rate_bits[static_cast<std::size_t>(i)],
                       10.0 * std::log10(rep.mean_sinr[static_cast<std::size_t>(i)]), rep.e1, rep.e2,
                       rep.utilization});
    emit(c, table.render(c), out);
    return 0;
}

int cmd_dof(const RunConfig& c, std::ostream& out)
{
    const Topology t = dof_topology(c);
    const DofPolytope poly =
        c.at("preset") == "general" ? region_general(t, dof_messages(c, t)) : region_basic(t);

    const Json& slice = c.at("slice");
    if (!slice.is_null()) {
        const auto a = static_cast<std::size_t>(slice[0].get<int>() - 1);
        const auto b = static_cast<std::size_t>(slice[1].get<int>() - 1);
        const auto pts = slice_boundary(poly, a, b);
        std::ostringstream os;
        os << "# config: " << config_record(c).dump() << "\n" << poly.labels.at(a) << "," << poly.labels.at(b)
           << "\n";
        for (const auto& [x, y] : pts)
            os << fmt(x) << "," << fmt(y) << "\n";
        emit(c, os.str(), out);
        return 0;
    }

    Json doc;
    doc["labels"] = poly.labels;
    doc["inequalities"] = Json::array();
    for (const auto& ineq : poly.inequalities)
        doc["inequalities"].push_back({{"coeffs", ineq.coeffs}, {"rhs", ineq.rhs}});
    doc["corners"] = corner_points(poly, t);
    emit(c, doc.dump(2) + "\n", out);
    return 0;
}

int cmd_pairing_check(const RunConfig& c, std::ostream& out)
{
    const int k = static_cast<int>(get_int(c, "k"));
    const bool three = get_int(c, "m") == 3;
    const std::uint64_t seed = seed_of(c);
    Table table({"k", "scheme", "c", "c1", "c2", "residual", "logpdf_gap"});
    for (std::int64_t t = 0; t < get_int(c, "samples"); ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        for (;;) {
            const CMatrix h = sample_hop_matrix(gaussian(), k, k, rng);
            try {
                const PairingMap map = three ? map_three_hop(gaussian(), h) : map_two_hop(gaussian(), h);
                const double base = log_pdf_matrix(gaussian(), h);
                double gap = 0.0;
                for (const auto& target : map.targets)
                    gap = std::max(gap, std::abs(log_pdf_matrix(gaussian(), target) - base));
                if (three)
                    table.add({k, scheme_label(3), map.product_scale(), map.scales[0], map.scales[1], map.residual,
                               gap});
                else
                    table.add({k, scheme_label(2), map.scales[0], nullptr, nullptr, map.residual, gap});
                break;
            } catch (const DegenerateInputError&) {
                continue;
            }
        }
    }
    emit(c, table.render(c), out);
    return 0;
}

} // namespace

// ---- public parsing helpers ---------------------------------------------

std::vector<double> parse_snr_list(const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty())
        throw PreconditionError("empty SNR list");
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3)
            throw PreconditionError("range must be start:stop:step");
        const double start = parse_number<double>(parts[0]);
        const double stop = parse_number<double>(parts[1]);
        const double step = parse_number<double>(parts[2]);
        if (!(step > 0.0) || stop < start)
            throw PreconditionError("range needs step > 0 and stop >= start");
        const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (n > 100000)
            throw PreconditionError("range has too many points");
        std::vector<double> out;
        for (std::int64_t i = 0; i < n; ++i)
            out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& p : split(t, ','))
        out.push_back(parse_number<double>(p));
    return out;
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    for (const auto& p : split(trim(text), ','))
        out.push_back(parse_number<int>(p));
    if (out.empty())
        throw PreconditionError("empty list");
    return out;
}

std::vector<std::vector<int>> parse_antennas(const std::string& text)
{
    std::vector<std::vector<int>> out;
    for (const auto& group : split(trim(text), ';'))
        out.push_back(parse_int_list(group));
    if (out.empty())
        throw PreconditionError("empty antenna specification");
    return out;
}

MessageSet parse_messages(const std::string& text)
{
    MessageSet out;
    const std::string t = trim(text);
    if (t.empty())
        return out;
    for (const auto& item : split(t, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2)
            throw PreconditionError("message '" + item + "' is not destination:source");
        out.push_back({parse_number<int>(parts[0]), parse_number<int>(parts[1])});
    }
    return out;
}

RunConfig parse_config(const std::vector<std::string>& args, std::ostream& out, bool& proceed)
{
    CLI::App app("Amplify-and-forward relay network toolkit", "afrelay");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    struct Bound
    {
        std::vector<Field> fields;
        std::map<std::string, std::string> text;
        std::map<std::string, bool> flags;
        std::string config_path;
        CLI::App* sub = nullptr;
    };
    std::map<std::string, Bound> bound;
    for (const auto& cmd : kCommands) {
        Bound& b = bound[cmd];
        b.fields = schema(cmd);
        b.sub = app.add_subcommand(cmd, kDescriptions.at(cmd));
        b.sub->add_option("--config", b.config_path, "JSON file with default values for this command");
        for (const auto& f : b.fields) {
            if (f.kind == Kind::Bool)
                b.sub->add_flag(flag_name(f.key), b.flags[f.key], f.help);
            else
                b.sub->add_option(flag_name(f.key), b.text[f.key], f.help);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        proceed = false;
        return {};
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        proceed = false;
        return {};
    } catch (const CLI::ParseError& e) {
        throw ConfigError("arguments", e.what());
    }

    RunConfig rc;
    for (auto& [cmd, b] : bound) {
        if (!b.sub->parsed())
            continue;
        rc.command = cmd;
        Json file = Json::object();
        if (!b.config_path.empty())
            file = read_config_file(b.config_path);
        for (const auto& [key, value] : file.items()) {
            const bool known =
                std::any_of(b.fields.begin(), b.fields.end(), [&](const Field& f) { return f.key == key; });
            if (!known)
                throw ConfigError(key, "unknown key for '" + cmd + "'");
        }
        for (const auto& f : b.fields) {
            Json v = f.fallback;
            if (file.contains(f.key) && !file[f.key].is_null())
                v = from_file(f, file[f.key]);
            const auto* opt = b.sub->get_option(flag_name(f.key));
            if (opt->count() > 0)
                v = f.kind == Kind::Bool ? Json(b.flags[f.key]) : from_flag(f, b.text[f.key]);
            rc.values[f.key] = std::move(v);
        }
        // help subcommand requests are surfaced by the CallForHelp path above
    }
    validate(rc);
    proceed = true;
    return rc;
}

int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try {
        validate(config);
        if (config.command == "rates")
            return cmd_rates(config, out);
        if (config.command == "cutset")
            return cmd_cutset(config, out);
        if (config.command == "sweep")
            return cmd_sweep(config, out);
        if (config.command == "simulate")
            return cmd_simulate(config, out);
        if (config.command == "dof")
            return cmd_dof(config, out);
        if (config.command == "pairing-check")
            return cmd_pairing_check(config, out);
        throw ConfigError("command", "unknown command '" + config.command + "'");
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    RunConfig config;
    try {
        bool proceed = false;
        config = parse_config(args, out, proceed);
        if (!proceed)
            return 0;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 2;
    }
    return dispatch(config, out, err);
}

} // namespace afrelay::cli
