// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace ecchain::cli
{
namespace
{
std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view want)
{
    throw Error{ErrorCode::config,
        std::string{key} + ": expected " + std::string{want} + ", got '" + std::string{value} + "'"};
}

uint64_t to_u64(std::string_view key, std::string_view v)
{
    uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size())
        bad(key, v, "a non-negative integer");
    return x;
}

double to_double(std::string_view key, std::string_view v)
{
    double x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size())
        bad(key, v, "a number");
    return x;
}

std::string fmt(double x)
{
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

struct Key
{
    std::string name;
    std::string help;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Key field(std::string name, std::string help, T RunConfig::*m)
{
    Key k{name, std::move(help), {}, {}};
    if constexpr (std::is_same_v<T, uint64_t>)
    {
        k.set = [m, name](RunConfig& c, std::string_view v) { c.*m = to_u64(name, v); };
        k.get = [m](const RunConfig& c) { return std::to_string(c.*m); };
    }
    else if constexpr (std::is_same_v<T, double>)
    {
        k.set = [m, name](RunConfig& c, std::string_view v) { c.*m = to_double(name, v); };
        k.get = [m](const RunConfig& c) { return fmt(c.*m); };
    }
    else
    {
        k.set = [m](RunConfig& c, std::string_view v) { c.*m = std::string{v}; };
        k.get = [m](const RunConfig& c) { return c.*m; };
    }
    return k;
}

const std::vector<Key>& keys()
{
    static const std::vector<Key> table{
        field("n_initial", "nodes admitted before the first epoch", &RunConfig::n_initial),
        field("alpha", "mean joins per epoch", &RunConfig::alpha),
        field("beta", "mean departures per epoch", &RunConfig::beta),
        field("epochs", "number of churn epochs", &RunConfig::epochs),
        field("delta_t", "recency window of the expiry timer", &RunConfig::delta_t),
        field("f_num", "access frequency threshold, numerator", &RunConfig::f_num),
        field("f_den", "access frequency threshold, denominator", &RunConfig::f_den),
        field("distance_d", "blocks kept unencoded behind the tip", &RunConfig::distance_d),
        field("cold_epoch_e", "blocks between cold trie folds", &RunConfig::cold_epoch_e),
        field("seed", "seed for workload and churn draws", &RunConfig::seed),
        field("workload_path", "trace file; empty uses the Zipf generator", &RunConfig::workload_path),
        field("out_dir", "directory for CSV output and store.conf", &RunConfig::out_dir),
        field("blocks_per_epoch", "blocks appended per epoch", &RunConfig::blocks_per_epoch),
        field("warmup_blocks", "blocks appended before nodes join", &RunConfig::warmup_blocks),
        field("mode", "accounting or materialized", &RunConfig::mode),
        field("availability_samples", "recovery probes per epoch", &RunConfig::availability_samples),
        field("zipf_s", "Zipf exponent of the generated workload", &RunConfig::zipf_s),
        field("zipf_addresses", "address population of the generated workload", &RunConfig::zipf_addresses),
    };
    return table;
}

const Key& find(std::string_view name)
{
    for (const auto& k : keys())
        if (k.name == name)
            return k;
    throw Error{ErrorCode::config, "unknown key '" + std::string{name} + "'"};
}
}  // namespace

sim::SimConfig RunConfig::to_sim() const
{
    sim::SimConfig s;
    s.n_initial = n_initial;
    s.alpha = alpha;
    s.beta = beta;
    s.epochs = epochs;
    s.blocks_per_epoch = blocks_per_epoch;
    s.warmup_blocks = warmup_blocks;
    s.expiry = {delta_t, {f_num, f_den}};
    s.distance_D = distance_d;
    s.cold_epoch_E = cold_epoch_e;
    s.seed = seed;
    s.workload_path = workload_path;
    s.zipf.s = zipf_s;
    s.zipf.addresses = zipf_addresses;
    s.zipf.seed = seed;
    if (mode == "accounting")
        s.mode = groups::DataMode::accounting;
    else if (mode == "materialized")
        s.mode = groups::DataMode::materialized;
    else
        bad("mode", mode, "accounting or materialized");
    if (availability_samples > UINT32_MAX)
        bad("availability_samples", std::to_string(availability_samples), "a 32-bit count");
    s.availability_samples = static_cast<uint32_t>(availability_samples);
    if (f_num == 0)
        bad("f_num", "0", "a positive integer");
    if (f_den == 0)
        bad("f_den", "0", "a positive integer");
    if (delta_t == 0)
        bad("delta_t", "0", "a positive integer");
    s.validate();
    return s;
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& k : keys())
            out.push_back(k.name);
        return out;
    }();
    return names;
}

std::string_view key_help(std::string_view key) { return find(key).help; }

void set_key(RunConfig& c, std::string_view key, std::string_view value) { find(key).set(c, trim(value)); }

KeyValues parse_config(std::string_view text, std::string_view origin)
{
    KeyValues out;
    size_t line_no = 0;
    while (!text.empty())
    {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto where = std::string{origin} + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error{ErrorCode::config, where + "expected key=value"};
        const auto key = std::string{trim(line.substr(0, eq))};
        try
        {
            find(key);
        }
        catch (const Error& e)
        {
            throw Error{ErrorCode::config, where + e.what()};
        }
        if (out.contains(key))
            throw Error{ErrorCode::config, where + "duplicate key '" + key + "'"};
        out[key] = std::string{trim(line.substr(eq + 1))};
    }
    return out;
}

KeyValues read_config_file(const std::filesystem::path& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw Error{ErrorCode::config, "cannot read config file " + path.string()};
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

RunConfig resolve(const KeyValues& file, const KeyValues& flags)
{
    RunConfig c;
    for (const auto& [k, v] : file)
        set_key(c, k, v);
    for (const auto& [k, v] : flags)
        set_key(c, k, v);
    return c;
}

std::string format_config(const RunConfig& c)
{
    std::string out;
    for (const auto& k : keys())
        out += k.name + "=" + k.get(c) + "\n";
    return out;
}

}  // namespace ecchain::cli
