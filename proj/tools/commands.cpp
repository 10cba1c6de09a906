// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <ecchain/expiry_reference.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace ecchain::cli
{
namespace
{
bool usage_error(const Error& e)
{
    return e.code() == ErrorCode::config || e.code() == ErrorCode::parse;
}

int report(const Error& e, std::ostream& err)
{
    err << (usage_error(e) ? "config error: " : "error: ") << e.what() << '\n';
    return usage_error(e) ? exit_usage : exit_violation;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f{path, std::ios::binary};
    f << text;
    if (!f)
        throw Error{ErrorCode::config, "cannot write " + path.string()};
}

template <typename Writer, typename Rows>
std::string csv_text(Writer w, const Rows& rows)
{
    std::ostringstream s;
    w(s, rows);
    return s.str();
}

std::vector<std::string> sorted_hex(const std::vector<state::Address>& v)
{
    std::vector<std::string> out;
    for (const auto& a : v)
        out.push_back(to_hex(a));
    std::sort(out.begin(), out.end());
    return out;
}

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (const auto& s : v)
        out += (out.empty() ? "" : " ") + s;
    return out.empty() ? "-" : out;
}

class DiffLog
{
public:
    explicit DiffLog(std::ostream& out) : out_{out} {}

    void add(uint64_t h, const std::string& what)
    {
        if (++count_ <= 20)
            out_ << "diff at height " << h << ": " << what << '\n';
    }
    uint64_t count() const noexcept { return count_; }

private:
    std::ostream& out_;
    uint64_t count_ = 0;
};

void compare(DiffLog& log, uint64_t h, const char* what, const std::vector<state::Address>& got,
    const std::vector<state::Address>& want)
{
    const auto g = sorted_hex(got);
    const auto w = sorted_hex(want);
    if (g != w)
        log.add(h, std::string{what} + " {" + join(g) + "} vs reference {" + join(w) + "}");
}
}  // namespace

int cmd_churn(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    sim::RunResult r;
    sim::SimConfig sc;
    fs::path dir;
    try
    {
        sc = config.to_sim();
        dir = config.out_dir.empty() ? fs::path{"."} : fs::path{config.out_dir};
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw Error{ErrorCode::config, "out_dir: " + ec.message()};
        auto stored = config;
        if (!stored.workload_path.empty())
            stored.workload_path = fs::absolute(stored.workload_path).string();
        stored.out_dir = fs::absolute(dir).string();
        write_file(dir / "store.conf", format_config(stored));
        r = sim::run(sc);
        write_file(dir / "metrics.csv", csv_text(sim::write_metrics_csv, r.metrics));
        write_file(dir / "bounds.csv", csv_text(sim::write_bounds_csv, r.bounds));
        write_file(dir / "overheads.csv", csv_text(sim::write_overheads_csv, r.metrics));
    }
    catch (const Error& e)
    {
        return report(e, err);
    }

    uint64_t pass = 0, fail = 0, skip = 0;
    for (const auto& b : r.bounds)
    {
        if (b.verdict == "pass")
            ++pass;
        else if (b.verdict == "fail")
            ++fail;
        else
            ++skip;
    }
    out << "epochs: " << r.bounds.size() << " (pass " << pass << ", fail " << fail << ", skip " << skip << ")\n";
    out << "bandwidth bound applied on " << r.bounds.size() - r.bw_epochs_skipped << " epochs\n";
    for (const auto& b : r.bounds)
    {
        if (b.verdict != "fail")
            continue;
        out << "epoch " << b.epoch << ": redundancy " << b.red_measured << " in [" << b.red.lower << ", "
            << b.red.upper << "], bandwidth " << b.bw_measured << " <= " << b.bw.upper
            << (b.available ? "" : ", recovery failed") << '\n';
    }
    out << "output: " << dir.string() << '\n';
    out << "verdict: " << (r.pass ? "pass" : "fail") << '\n';
    return r.pass ? exit_ok : exit_violation;
}

int cmd_replay(const ReplayOptions& opts, std::ostream& out, std::ostream& err)
{
    std::vector<workload::Record> trace;
    try
    {
        opts.expiry.validate();
        if (opts.cold_epoch_e == 0)
            throw Error{ErrorCode::config, "cold_epoch_e: must be at least 1"};
        trace = workload::load(opts.workload_path);
    }
    catch (const Error& e)
    {
        return report(e, err);
    }

    trie::Trie base;
    state::TrieColdReader reader{base};
    state::DualTrie dual{opts.expiry, zero_digest, &reader};
    ledger::Chain chain;
    std::optional<state::ReferenceExpiry> ref;
    if (opts.oracle)
        ref.emplace(opts.expiry.delta_T, opts.expiry.F.num, opts.expiry.F.den);
    DiffLog diffs{out};
    uint64_t cold = 0;

    if (opts.per_height)
        out << "height,hot,cold,created,mined,expired\n";
    for (const auto& rec : trace)
    {
        const auto access = workload::to_block_access(rec);
        state::BlockResult res;
        try
        {
            chain.append(workload::block_payload(rec));
            res = dual.process_block(access);
        }
        catch (const Error& e)
        {
            err << "error: height " << rec.height << ": " << e.what() << '\n';
            return exit_usage;
        }
        cold += res.expired.size();
        cold -= res.mined.size();
        if (rec.height % opts.cold_epoch_e == 0)
        {
            base = dual.apply_overlay(base);
            dual.take_overlay(base.root_digest(), &reader);
        }
        if (opts.per_height)
            out << rec.height << ',' << dual.hot().size() << ',' << cold << ',' << res.created.size() << ','
                << res.mined.size() << ',' << res.expired.size() << '\n';
        if (!ref)
            continue;

        const auto want = ref->step(access);
        compare(diffs, rec.height, "created", res.created, want.created);
        compare(diffs, rec.height, "mined", res.mined, want.mined);
        compare(diffs, rec.height, "expired", res.expired, want.expired);
        uint64_t hot_missing = 0;
        dual.hot().for_each([&](const trie::Key& k, const Bytes&) { hot_missing += ref->hot().contains(k) ? 0 : 1; });
        if (hot_missing != 0 || dual.hot().size() != ref->hot().size())
            diffs.add(rec.height, "hot set differs (" + std::to_string(dual.hot().size()) + " vs reference " +
                                      std::to_string(ref->hot().size()) + ")");
        if (cold != ref->cold().size())
            diffs.add(rec.height,
                "cold count " + std::to_string(cold) + " vs reference " + std::to_string(ref->cold().size()));
    }

    const auto cold_trie = dual.apply_overlay(base);
    if (ref)
    {
        std::set<state::Address> got;
        cold_trie.for_each([&](const trie::Key& k, const Bytes&) { got.insert(k); });
        if (got != ref->cold())
            diffs.add(chain.tip(), "final cold set differs");
    }

    trie::Trie full = cold_trie;
    dual.hot().for_each([&](const trie::Key& k, const Bytes& v) { full.put(k, v); });
    out << "blocks: " << trace.size() << '\n';
    out << "hot_states: " << dual.hot().size() << '\n';
    out << "cold_states: " << cold_trie.size() << '\n';
    out << "hot_root: " << to_hex(dual.hot().root_digest()) << '\n';
    out << "cold_root: " << to_hex(cold_trie.root_digest()) << '\n';
    out << "ledger_bytes: " << chain.serialized_bytes() << '\n';
    out << "hot_bytes: " << dual.hot().byte_size() << '\n';
    out << "cold_bytes: " << cold_trie.byte_size() << '\n';
    out << "full_replica_bytes: " << chain.serialized_bytes() + full.byte_size() << '\n';
    out << "cold_fetches: " << dual.cold_fetches() << '\n';
    if (ref)
        out << "oracle: " << diffs.count() << " diffs\n";
    return diffs.count() == 0 ? exit_ok : exit_violation;
}

int cmd_inspect(const std::string& store_dir, const InspectQuery& q, std::ostream& out, std::ostream& err)
{
    std::optional<sim::Simulator> sim;
    try
    {
        if (q.block.has_value() == q.addr.has_value())
            throw Error{ErrorCode::config, "give exactly one of --block or --addr"};
        auto c = resolve(read_config_file(fs::path{store_dir} / "store.conf"), {});
        c.mode = "materialized";
        sim.emplace(c.to_sim());
        sim::run(*sim);
    }
    catch (const Error& e)
    {
        return report(e, err);
    }

    auto& cluster = sim->cluster();
    const auto& chain = sim->chain();
    const auto& groups = cluster.groups();
    out << "store: " << store_dir << " (tip " << chain.tip() << ", " << cluster.node_count() << " nodes, "
        << groups.size() << " groups)\n";
    if (q.group >= groups.size())
    {
        err << "config error: group " << q.group << " does not exist (" << groups.size() << " groups)\n";
        return exit_usage;
    }
    const auto& g = groups[q.group];
    out << "group: " << q.group << " (id " << g.id << ", size " << g.nominal << ", " << g.members.size()
        << " live, encoded to " << g.encoded_upto << ")\n";
    const auto offline = std::min<size_t>(q.offline, g.members.size());
    for (size_t i = 0; i < offline; ++i)
        cluster.set_online(g.members[i], false);
    if (offline > 0)
        out << "offline: " << offline << " members\n";

    try
    {
        if (q.block)
        {
            const auto h = *q.block;
            if (h == 0 || h > chain.tip())
            {
                err << "config error: block " << h << " outside [1, " << chain.tip() << "]\n";
                return exit_usage;
            }
            const auto b = cluster.recover_block(g.id, h);
            const auto& orig = chain.at(h);
            const auto bytes = ledger::encode_block(*b);
            out << "block: " << h << '\n';
            out << "source: " << (h <= g.encoded_upto ? "encoded strip" : "recent window") << '\n';
            out << "hash: " << to_hex(b->block_hash) << '\n';
            out << "parent: " << to_hex(b->parent_hash) << '\n';
            out << "payload_bytes: " << b->payload.size() << '\n';
            out << "bytes: " << to_hex(bytes) << '\n';
            const bool ok = bytes == ledger::encode_block(orig) &&
                            ledger::block_hash(b->height, b->parent_hash, b->payload) == orig.block_hash;
            out << "integrity: " << (ok ? "ok" : "FAILED") << '\n';
            return ok ? exit_ok : exit_violation;
        }

        const auto addr = workload::parse_addr(*q.addr);
        const auto key = workload::state_key(addr);
        out << "addr: " << workload::format_addr(addr) << '\n';
        out << "key: " << to_hex(key) << '\n';
        auto& dual = sim->dual();
        if (dual.is_hot(key))
        {
            const auto& hot = dual.hot();
            const auto check = trie::verify_proof(hot.root_digest(), key, hot.prove(key));
            const bool ok = check.verdict == trie::ProofVerdict::present;
            out << "state: hot\n";
            out << "value: " << to_hex(check.value) << '\n';
            out << "proof: " << (ok ? "ok" : "FAILED") << " vs hot root " << to_hex(hot.root_digest()) << '\n';
            return ok ? exit_ok : exit_violation;
        }
        if (const auto it = dual.overlay().insert.find(key); it != dual.overlay().insert.end())
        {
            out << "state: cold, awaiting the next fold\n";
            out << "value: " << to_hex(it->second) << '\n';
            out << "proof: none until the fold at height "
                << (chain.tip() / sim->config().cold_epoch_E + 1) * sim->config().cold_epoch_E << '\n';
            return exit_ok;
        }
        const auto r = cluster.lookup_cold(g.id, key);
        const auto& root = g.cold.cold_root;
        const auto check = trie::verify_proof(root, key, r->proof);
        if (check.verdict == trie::ProofVerdict::invalid)
        {
            out << "proof: FAILED vs cold root " << to_hex(root) << '\n';
            return exit_violation;
        }
        if (check.verdict == trie::ProofVerdict::absent)
        {
            out << "absent (proof ok)\n";
            return exit_ok;
        }
        out << "state: cold\n";
        out << "value: " << to_hex(check.value) << '\n';
        out << "chunks_fetched: " << r->chunks_fetched << (r->used_fallback ? " (full decode)" : "") << '\n';
        out << "proof: ok vs cold root " << to_hex(root) << '\n';
        return exit_ok;
    }
    catch (const Error& e)
    {
        return report(e, err);
    }
}

int cmd_genwork(const GenworkOptions& opts, std::ostream& out, std::ostream& err)
{
    try
    {
        opts.zipf.validate();
        const auto records = workload::generate_zipf(opts.zipf, opts.blocks);
        if (opts.out_path.empty())
        {
            workload::write(out, records);
            return exit_ok;
        }
        std::ofstream f{opts.out_path, std::ios::binary};
        workload::write(f, records);
        if (!f)
            throw Error{ErrorCode::config, "cannot write " + opts.out_path};
        out << "wrote " << records.size() << " blocks to " << opts.out_path << '\n';
        return exit_ok;
    }
    catch (const Error& e)
    {
        return report(e, err);
    }
}

}  // namespace ecchain::cli
