// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "run_config.hpp"

#include <ecchain/workload.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace ecchain::cli
{
enum ExitCode : int
{
    exit_ok = 0,
    exit_violation = 1,
    exit_usage = 2,
};

/// Runs the churn experiment and writes metrics.csv, bounds.csv,
/// overheads.csv and store.conf under out_dir.
int cmd_churn(const RunConfig& config, std::ostream& out, std::ostream& err);

struct ReplayOptions
{
    std::string workload_path;
    state::ExpiryParams expiry;
    uint64_t cold_epoch_e = 128;
    bool oracle = false;
    bool per_height = true;
};

/// Drives the dual trie over a trace and reports hot/cold sizes per height,
/// final roots and storage. With `oracle`, diffs every block against the
/// reference interpreter.
int cmd_replay(const ReplayOptions& opts, std::ostream& out, std::ostream& err);

struct InspectQuery
{
    std::optional<uint64_t> block;
    std::optional<std::string> addr;
    uint64_t group = 0;    ///< index into the group list
    uint32_t offline = 0;  ///< group members taken offline before the query
};

/// Rebuilds the store described by store_dir/store.conf with chunks
/// materialized, then recovers the block or state through the group.
int cmd_inspect(const std::string& store_dir, const InspectQuery& q, std::ostream& out, std::ostream& err);

struct GenworkOptions
{
    workload::ZipfParams zipf;
    uint64_t blocks = 1000;
    std::string out_path;  ///< empty: stdout
};

int cmd_genwork(const GenworkOptions& opts, std::ostream& out, std::ostream& err);

/// Full command line: `ecchain <churn|replay|inspect|genwork> ...`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecchain::cli
