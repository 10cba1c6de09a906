// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace ecchain::cli
{
namespace
{
/// --config plus one string flag per config key; only flags given on the
/// command line override the file.
struct ConfigFlags
{
    std::string config_file;
    KeyValues values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App& cmd, const std::vector<std::string>& names)
    {
        cmd.add_option("--config", config_file, "key=value config file");
        for (const auto& k : names)
            options[k] = cmd.add_option("--" + k, values[k], std::string{key_help(k)});
    }

    KeyValues given() const
    {
        KeyValues out;
        for (const auto& [k, opt] : options)
            if (opt->count() > 0)
                out[k] = values.at(k);
        return out;
    }

    RunConfig resolve() const
    {
        const auto file = config_file.empty() ? KeyValues{} : read_config_file(config_file);
        return cli::resolve(file, given());
    }
};
}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"ecchain: erasure-coded ledger and state storage simulator", "ecchain"};
    app.require_subcommand(1);

    auto* churn = app.add_subcommand("churn", "run the churn experiment and write CSV metrics");
    ConfigFlags churn_flags;
    churn_flags.attach(*churn, config_keys());

    auto* replay = app.add_subcommand("replay", "drive the dual trie over a workload trace");
    ConfigFlags replay_flags;
    replay_flags.attach(*replay, {"delta_t", "f_num", "f_den", "cold_epoch_e", "workload_path"});
    std::string replay_path;
    bool oracle = false, quiet = false;
    replay->add_option("workload", replay_path, "trace file (overrides workload_path)");
    replay->add_flag("--oracle", oracle, "diff every block against the reference interpreter");
    replay->add_flag("--quiet", quiet, "omit the per-height table");

    auto* inspect = app.add_subcommand("inspect", "recover a block or state value from a store");
    std::string store_dir;
    InspectQuery query;
    uint64_t block = 0;
    std::string addr;
    inspect->add_option("store_dir", store_dir, "directory holding store.conf")->required();
    auto* block_opt = inspect->add_option("--block", block, "block height");
    auto* addr_opt = inspect->add_option("--addr", addr, "32-hex-character address");
    block_opt->excludes(addr_opt);
    inspect->add_option("--group", query.group, "group index");
    inspect->add_option("--offline", query.offline, "members of the group to take offline first");

    auto* genwork = app.add_subcommand("genwork", "generate a Zipf-distributed workload trace");
    GenworkOptions gen;
    genwork->add_option("--blocks", gen.blocks, "number of blocks");
    genwork->add_option("--addresses", gen.zipf.addresses, "address population");
    genwork->add_option("--accesses_per_block", gen.zipf.accesses_per_block, "draws per block");
    genwork->add_option("--s", gen.zipf.s, "Zipf exponent");
    genwork->add_option("--size_min", gen.zipf.size_min, "smallest block payload");
    genwork->add_option("--size_max", gen.zipf.size_max, "largest block payload");
    genwork->add_option("--seed", gen.zipf.seed, "generator seed");
    genwork->add_option("--out", gen.out_path, "output file; stdout when omitted");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try
    {
        if (*churn)
            return cmd_churn(churn_flags.resolve(), out, err);
        if (*replay)
        {
            const auto c = replay_flags.resolve();
            ReplayOptions o;
            o.workload_path = replay_path.empty() ? c.workload_path : replay_path;
            if (o.workload_path.empty())
                throw Error{ErrorCode::config, "workload_path: no trace given"};
            o.expiry = {c.delta_t, {c.f_num, c.f_den}};
            o.cold_epoch_e = c.cold_epoch_e;
            o.oracle = oracle;
            o.per_height = !quiet;
            return cmd_replay(o, out, err);
        }
        if (*inspect)
        {
            if (block_opt->count() > 0)
                query.block = block;
            if (addr_opt->count() > 0)
                query.addr = addr;
            return cmd_inspect(store_dir, query, out, err);
        }
        return cmd_genwork(gen, out, err);
    }
    catch (const Error& e)
    {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    }
}

}  // namespace ecchain::cli
