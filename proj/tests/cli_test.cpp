// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ecchain;
using namespace ecchain::cli;
namespace fs = std::filesystem;

namespace
{
struct Run
{
    int code = 0;
    std::string out, err;
};

Run ecchain_cmd(std::vector<std::string> args)
{
    args.insert(args.begin(), "ecchain");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in{p, std::ios::binary};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Dir : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("ecchain_cli_" + std::string{::testing::UnitTest::GetInstance()->current_test_info()->name()});
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    void write(const std::string& name, const std::string& text) const { std::ofstream{dir_ / name} << text; }

    fs::path dir_;
};

const std::vector<std::string> small_churn{"churn", "--n_initial", "16", "--epochs", "4", "--warmup_blocks", "300",
    "--zipf_addresses", "300", "--distance_d", "20", "--cold_epoch_e", "32", "--beta", "1"};

std::vector<std::string> with(std::vector<std::string> base, std::initializer_list<std::string> more)
{
    base.insert(base.end(), more);
    return base;
}

std::string addr_hex(uint8_t last)
{
    workload::Addr a{};
    a.back() = last;
    return workload::format_addr(a);
}
}  // namespace

TEST(config, keys_parse_and_round_trip)
{
    const auto kv = parse_config("# comment\nn_initial = 32\nalpha=8  # joins\n\nworkload_path=\n");
    EXPECT_EQ(kv.at("n_initial"), "32");
    EXPECT_EQ(kv.at("alpha"), "8");
    const auto c = resolve(kv, {{"alpha", "16"}});
    EXPECT_EQ(c.n_initial, 32u);
    EXPECT_EQ(c.alpha, 16.0);
    EXPECT_EQ(c.workload_path, "");

    auto d = c;
    d.beta = 0.25;
    d.mode = "materialized";
    const auto back = resolve(parse_config(format_config(d)), {});
    EXPECT_EQ(format_config(back), format_config(d));
    for (const auto& k : {"n_initial", "alpha", "beta", "epochs", "delta_t", "f_num", "f_den", "distance_d",
             "cold_epoch_e", "seed", "workload_path", "out_dir"})
        EXPECT_NE(std::find(config_keys().begin(), config_keys().end(), k), config_keys().end()) << k;
}

TEST(config, malformed_input_names_line_and_key)
{
    try
    {
        parse_config("alpha=1\nnot a pair\n", "run.conf");
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::config);
        EXPECT_NE(std::string{e.what()}.find("run.conf:2"), std::string::npos);
    }
    test::expect_code(ErrorCode::config, [] { parse_config("alpha=1\nalpha=2\n"); });
    test::expect_code(ErrorCode::config, [] { parse_config("nodes=3\n"); });
    RunConfig c;
    test::expect_code(ErrorCode::config, [&] { set_key(c, "epochs", "-3"); });
    test::expect_code(ErrorCode::config, [&] { set_key(c, "alpha", "4x"); });
    c.mode = "fast";
    test::expect_code(ErrorCode::config, [&] { c.to_sim(); });
    c = RunConfig{};
    c.f_den = 0;
    test::expect_code(ErrorCode::config, [&] { c.to_sim(); });
}

TEST_F(Dir, churn_writes_csvs_and_exits_zero_when_bounds_hold)
{
    const auto r = ecchain_cmd(with(small_churn, {"--out_dir", path("run")}));
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("verdict: pass"), std::string::npos);
    const auto metrics = slurp(dir_ / "run" / "metrics.csv");
    EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 5);
    EXPECT_EQ(metrics.substr(0, metrics.find('\n')),
        "epoch,n_nodes,n_groups,staging,s_bytes,per_node_bytes_mean,redundancy_ratio,bw_join,bw_upgrade,"
        "bw_downgrade,bw_fetch");
    const auto bounds = slurp(dir_ / "run" / "bounds.csv");
    EXPECT_EQ(bounds.substr(0, bounds.find('\n')),
        "epoch,red_lower,red_measured,red_upper,bw_lower,bw_measured,bw_upper,verdict");
    EXPECT_TRUE(fs::exists(dir_ / "run" / "overheads.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "run" / "store.conf"));
    EXPECT_EQ(metrics.find('\r'), std::string::npos);
}

TEST_F(Dir, churn_repeats_for_a_seed)
{
    ASSERT_EQ(ecchain_cmd(with(small_churn, {"--out_dir", path("a")})).code, 0);
    ASSERT_EQ(ecchain_cmd(with(small_churn, {"--out_dir", path("b")})).code, 0);
    for (const auto* f : {"metrics.csv", "bounds.csv", "overheads.csv"})
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(Dir, churn_without_epochs_writes_headers_only)
{
    const auto r = ecchain_cmd({"churn", "--alpha", "0", "--beta", "0", "--epochs", "0", "--n_initial", "8",
        "--warmup_blocks", "50", "--out_dir", path("empty")});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto metrics = slurp(dir_ / "empty" / "metrics.csv");
    EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 1);
    const auto bounds = slurp(dir_ / "empty" / "bounds.csv");
    EXPECT_EQ(std::count(bounds.begin(), bounds.end(), '\n'), 1);
}

TEST_F(Dir, flags_override_the_config_file)
{
    write("run.conf", "epochs=3\nn_initial=16\nwarmup_blocks=300\nzipf_addresses=300\ndistance_d=20\ncold_epoch_e=32\n");
    const auto r = ecchain_cmd({"churn", "--config", path("run.conf"), "--epochs", "2", "--out_dir", path("o")});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto metrics = slurp(dir_ / "o" / "metrics.csv");
    EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 3);
    const auto stored = parse_config(slurp(dir_ / "o" / "store.conf"));
    EXPECT_EQ(stored.at("epochs"), "2");
    EXPECT_EQ(stored.at("n_initial"), "16");
}

TEST_F(Dir, usage_and_config_errors_exit_two)
{
    write("bad.conf", "alpha=2\nbogus=1\n");
    auto r = ecchain_cmd({"churn", "--config", path("bad.conf")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("bad.conf:2"), std::string::npos);
    r = ecchain_cmd({"churn", "--n_initial", "3", "--out_dir", path("x")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("n_initial"), std::string::npos);
    EXPECT_EQ(ecchain_cmd({"churn", "--alpha", "abc"}).code, 2);
    EXPECT_EQ(ecchain_cmd({}).code, 2);
    EXPECT_EQ(ecchain_cmd({"frobnicate"}).code, 2);
    EXPECT_EQ(ecchain_cmd({"churn", "--help"}).code, 0);
}

TEST_F(Dir, replay_matches_the_reference_interpreter)
{
    ASSERT_EQ(ecchain_cmd({"genwork", "--blocks", "10000", "--addresses", "1000", "--s", "1.1", "--out",
                  path("w.txt")})
                  .code,
        0);
    const auto r = ecchain_cmd({"replay", path("w.txt"), "--oracle", "--quiet", "--delta_t", "25", "--f_num",
        "1", "--f_den", "3", "--cold_epoch_e", "64"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("blocks: 10000"), std::string::npos);
    EXPECT_NE(r.out.find("oracle: 0 diffs"), std::string::npos);
}

TEST_F(Dir, replay_keeps_an_address_accessed_every_block_hot)
{
    std::string trace = "h=1; access=; create=" + addr_hex(1) + "," + addr_hex(2) + "; size=10\n";
    for (int h = 2; h <= 300; ++h)
        trace += "h=" + std::to_string(h) + "; access=" + addr_hex(1) + "; create=; size=10\n";
    write("t.txt", trace);
    const auto r = ecchain_cmd({"replay", path("t.txt"), "--oracle", "--delta_t", "5", "--cold_epoch_e", "16"});
    ASSERT_EQ(r.code, 0) << r.out << r.err;
    std::istringstream lines{r.out};
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "height,hot,cold,created,mined,expired");
    uint64_t rows = 0;
    while (std::getline(lines, line) && line.find(':') == std::string::npos)
    {
        ++rows;
        const auto h = std::stoull(line.substr(0, line.find(',')));
        const auto rest = line.substr(line.find(',') + 1);
        // address 2 expires at 1 + ceil(1 / F) = 11, address 1 never
        EXPECT_EQ(rest.substr(0, rest.find(',')), h < 11 ? "2" : "1") << line;
    }
    EXPECT_EQ(rows, 300u);
    EXPECT_NE(r.out.find("hot_states: 1"), std::string::npos);
    EXPECT_NE(r.out.find("cold_states: 1"), std::string::npos);
}

TEST_F(Dir, replay_of_an_empty_trace_is_empty)
{
    write("empty.txt", "");
    const auto r = ecchain_cmd({"replay", path("empty.txt"), "--oracle"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("blocks: 0"), std::string::npos);
    EXPECT_NE(r.out.find("oracle: 0 diffs"), std::string::npos);
}

TEST_F(Dir, replay_reports_the_bad_line)
{
    write("bad.txt", "h=1; access=; create=" + addr_hex(1) + "; size=10\nh=2; access=zz; create=; size=1\n");
    const auto r = ecchain_cmd({"replay", path("bad.txt")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(Dir, inspect_recovers_blocks_and_states_through_the_group)
{
    ASSERT_EQ(ecchain_cmd(with(small_churn, {"--out_dir", path("store")})).code, 0);
    const auto store = path("store");

    auto r = ecchain_cmd({"inspect", store, "--block", "5"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("source: encoded strip"), std::string::npos);
    EXPECT_NE(r.out.find("integrity: ok"), std::string::npos);

    sim::SimConfig sc = resolve(parse_config(slurp(dir_ / "store" / "store.conf")), {}).to_sim();
    sim::Simulator sim{sc};
    sim::run(sim);
    const auto expected = to_hex(ledger::encode_block(sim.chain().at(5)));
    EXPECT_NE(r.out.find("bytes: " + expected + "\n"), std::string::npos);

    r = ecchain_cmd({"inspect", store, "--block", std::to_string(sim.chain().tip())});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("source: recent window"), std::string::npos);

    // half of an 8-member group offline: still decodable
    r = ecchain_cmd({"inspect", store, "--block", "5", "--offline", "4"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("integrity: ok"), std::string::npos);
    r = ecchain_cmd({"inspect", store, "--block", "5", "--offline", "8"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("reachable"), std::string::npos);

    const trie::Key* cold_key = nullptr;
    std::vector<trie::Key> cold_keys;
    sim.cold_base().for_each([&](const trie::Key& k, const Bytes&) {
        if (!sim.dual().is_hot(k) && !sim.dual().overlay().remove.contains(k))
            cold_keys.push_back(k);
    });
    ASSERT_FALSE(cold_keys.empty());
    cold_key = &cold_keys.front();
    // addresses are not recoverable from keys; search the generator's population
    workload::ZipfGenerator gen{sc.zipf};
    std::optional<workload::Addr> cold_addr;
    for (uint64_t i = 0; i < sc.zipf.addresses && !cold_addr; ++i)
        if (workload::state_key(gen.address(i)) == *cold_key)
            cold_addr = gen.address(i);
    ASSERT_TRUE(cold_addr);

    r = ecchain_cmd({"inspect", store, "--addr", workload::format_addr(*cold_addr)});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("state: cold\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("proof: ok vs cold root " + to_hex(sim.cold_base().root_digest())), std::string::npos)
        << r.out;
    EXPECT_NE(r.out.find("value: " + to_hex(*sim.cold_base().get(*cold_key))), std::string::npos);
    EXPECT_NE(r.out.find("chunks_fetched: 1\n"), std::string::npos);

    r = ecchain_cmd({"inspect", store, "--addr", addr_hex(0xee)});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("absent (proof ok)"), std::string::npos);
}

TEST_F(Dir, inspect_rejects_bad_queries)
{
    EXPECT_EQ(ecchain_cmd({"inspect", path("missing"), "--block", "1"}).code, 2);
    ASSERT_EQ(ecchain_cmd({"churn", "--epochs", "0", "--n_initial", "4", "--warmup_blocks", "30", "--out_dir",
                  path("s")})
                  .code,
        0);
    EXPECT_EQ(ecchain_cmd({"inspect", path("s")}).code, 2);
    EXPECT_EQ(ecchain_cmd({"inspect", path("s"), "--block", "0"}).code, 2);
    EXPECT_EQ(ecchain_cmd({"inspect", path("s"), "--block", "31"}).code, 2);
    EXPECT_EQ(ecchain_cmd({"inspect", path("s"), "--block", "1", "--group", "5"}).code, 2);
    EXPECT_EQ(ecchain_cmd({"inspect", path("s"), "--addr", "xyz"}).code, 2);
    EXPECT_EQ(ecchain_cmd({"inspect", path("s"), "--block", "1", "--addr", addr_hex(1)}).code, 2);
}

TEST_F(Dir, genwork_is_seeded_and_parses_back)
{
    const auto a = ecchain_cmd({"genwork", "--blocks", "50", "--seed", "7"});
    const auto b = ecchain_cmd({"genwork", "--blocks", "50", "--seed", "7"});
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, ecchain_cmd({"genwork", "--blocks", "50", "--seed", "8"}).out);
    std::istringstream in{a.out};
    EXPECT_EQ(workload::parse(in).size(), 50u);
    EXPECT_EQ(ecchain_cmd({"genwork", "--addresses", "0"}).code, 2);
}
