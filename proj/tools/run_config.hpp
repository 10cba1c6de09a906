// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/churn_simulator.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ecchain::cli
{
struct RunConfig
{
    uint64_t n_initial = 64;
    double alpha = 4.0;
    double beta = 0.0;
    uint64_t epochs = 50;
    uint64_t delta_t = 100;
    uint64_t f_num = 1;
    uint64_t f_den = 10;
    uint64_t distance_d = 100;
    uint64_t cold_epoch_e = 128;
    uint64_t seed = 1;
    std::string workload_path;
    std::string out_dir = ".";

    uint64_t blocks_per_epoch = 10;
    uint64_t warmup_blocks = 2000;
    std::string mode = "accounting";
    uint64_t availability_samples = 100;
    double zipf_s = 1.0;
    uint64_t zipf_addresses = 1000;

    /// Throws Error{config} naming the offending key.
    sim::SimConfig to_sim() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Every key a config file or flag may set, in file order.
const std::vector<std::string>& config_keys();
std::string_view key_help(std::string_view key);

/// Throws Error{config} for an unknown key or a malformed value.
void set_key(RunConfig& c, std::string_view key, std::string_view value);

/// Flat key=value lines; '#' starts a comment. Throws Error{config} with
/// the line number.
KeyValues parse_config(std::string_view text, std::string_view origin = "config");
KeyValues read_config_file(const std::filesystem::path& path);

/// Defaults, then `file`, then `flags`.
RunConfig resolve(const KeyValues& file, const KeyValues& flags);

/// key=value text that resolves back to `c`.
std::string format_config(const RunConfig& c);

}  // namespace ecchain::cli
