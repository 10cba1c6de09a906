// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/group_maintenance.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <set>

using namespace ecchain;
using groups::Cluster;
using groups::ClusterConfig;
using groups::DataMode;
using groups::EventKind;

namespace
{
constexpr uint64_t kReplica = 1000;

ledger::Chain make_chain(uint64_t blocks, uint64_t seed = 1)
{
    std::mt19937_64 rng{seed};
    ledger::Chain c;
    for (uint64_t i = 0; i < blocks; ++i)
        c.append(test::random_bytes(rng, 20 + rng() % 60));
    return c;
}

trie::Key key_of(uint64_t i)
{
    ByteWriter w;
    w.u64(i);
    return sha256(w.bytes());
}

trie::Trie make_trie(uint64_t n, uint64_t salt = 0)
{
    trie::Trie t;
    for (uint64_t i = 0; i < n; ++i)
    {
        ByteWriter w;
        w.u64(i ^ salt);
        t.put(key_of(i), w.take());
    }
    return t;
}

dht::NodeId node(uint64_t i) { return dht::make_node_id(i); }

struct Harness
{
    ledger::Chain chain;
    trie::Trie base;
    Cluster cluster;
    uint64_t next = 0;

    Harness(uint64_t blocks, uint64_t keys, DataMode mode, uint64_t D = 0)
      : chain{make_chain(blocks)}, base{make_trie(keys)},
        cluster{chain, ClusterConfig{mode, D, [] { return kReplica; }}}
    {
        cluster.set_cold_base(&base);
    }

    void join(uint64_t n)
    {
        for (uint64_t i = 0; i < n; ++i)
            cluster.admit(node(next++));
    }
};

const groups::Group& only_group(const Cluster& c, uint32_t nominal)
{
    for (const auto& g : c.groups())
        if (g.nominal == nominal)
            return g;
    throw std::runtime_error("no group of that size");
}

void expect_all_blocks(Cluster& c, const groups::Group& g, const ledger::Chain& chain)
{
    for (uint64_t h = 1; h <= chain.tip(); ++h)
    {
        const auto b = c.recover_block(g.id, h);
        ASSERT_TRUE(b.has_value());
        EXPECT_EQ(b->block_hash, chain.at(h).block_hash) << "height " << h;
    }
}

void expect_all_keys(Cluster& c, const groups::Group& g, const trie::Trie& base, uint64_t n)
{
    for (uint64_t i = 0; i < n; ++i)
    {
        const auto r = c.lookup_cold(g.id, key_of(i));
        ASSERT_TRUE(r.has_value());
        EXPECT_EQ(r->value, base.get(key_of(i)));
    }
}
}  // namespace

TEST(admission, three_joins_stay_in_staging)
{
    Harness h(16, 50, DataMode::materialized);
    h.join(3);
    EXPECT_TRUE(h.cluster.groups().empty());
    EXPECT_EQ(h.cluster.staging().size(), 3u);
    EXPECT_EQ(h.cluster.network().ledger()[dht::Traffic::join].bytes, 3 * kReplica);
}

TEST(admission, four_joins_form_a_group_of_four)
{
    Harness h(16, 50, DataMode::materialized);
    h.join(4);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{4});
    EXPECT_TRUE(h.cluster.staging().empty());
    const auto& led = h.cluster.network().ledger();
    EXPECT_EQ(led[dht::Traffic::join].bytes, 4 * kReplica);
    EXPECT_EQ(led[dht::Traffic::upgrade].bytes, 0u);
    const auto& g = h.cluster.groups()[0];
    EXPECT_EQ(g.encoded_upto, 16u);
    EXPECT_EQ(g.strips.size(), 8u);
    expect_all_blocks(h.cluster, g, h.chain);
    expect_all_keys(h.cluster, g, h.base, 50);
}

TEST(admission, duplicate_and_unknown_nodes_are_rejected)
{
    Harness h(8, 10, DataMode::materialized);
    h.join(5);
    test::expect_code(ErrorCode::parameter, [&] { h.cluster.admit(node(0)); });
    test::expect_code(ErrorCode::parameter, [&] { h.cluster.leave(node(99)); });
    test::expect_code(ErrorCode::parameter, [&] { h.cluster.set_online(node(99), false); });
}

TEST(merge, eight_joins_make_one_group_of_eight)
{
    Harness h(32, 80, DataMode::materialized);
    h.join(8);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{8});
    const auto& ev = h.cluster.events();
    ASSERT_EQ(ev.size(), 3u);
    EXPECT_EQ(ev[0].kind, EventKind::form);
    EXPECT_EQ(ev[1].kind, EventKind::form);
    EXPECT_EQ(ev[2].kind, EventKind::merge);
    EXPECT_EQ(ev[2].sources, (std::vector<uint64_t>{ev[0].group, ev[1].group}));
    const auto& g = h.cluster.groups()[0];
    expect_all_blocks(h.cluster, g, h.chain);
    expect_all_keys(h.cluster, g, h.base, 80);
}

TEST(merge, cascade_four_four_eight_to_sixteen)
{
    Harness h(32, 40, DataMode::materialized);
    h.join(8);
    h.join(4);
    ASSERT_EQ(h.cluster.census(), (std::vector<uint32_t>{8, 4}));
    h.join(4);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{16});
    const auto& ev = h.cluster.events();
    ASSERT_GE(ev.size(), 2u);
    EXPECT_EQ(ev[ev.size() - 2].kind, EventKind::merge);
    EXPECT_EQ(ev[ev.size() - 2].size, 8u);
    EXPECT_EQ(ev.back().kind, EventKind::merge);
    EXPECT_EQ(ev.back().size, 16u);
    expect_all_blocks(h.cluster, h.cluster.groups()[0], h.chain);
}

TEST(merge, binary_decomposition_of_136)
{
    Harness h(64, 100, DataMode::accounting);
    h.join(136);
    EXPECT_EQ(h.cluster.census(), (std::vector<uint32_t>{128, 8}));
    EXPECT_TRUE(h.cluster.staging().empty());
}

TEST(merge, data_holders_receive_nothing)
{
    // tip 64, D 0: every group has encoded 64 heights. Fresh joiners still
    // hold the replica they downloaded and regenerate parity from it.
    Harness h(64, 200, DataMode::materialized);
    h.join(16);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{16});
    const auto& st = h.cluster.stats();
    EXPECT_EQ(st.merges, 3u);
    EXPECT_EQ(st.local_regenerations, 3u);
    EXPECT_EQ(st.data_holder_push_bytes, 0u);
    EXPECT_EQ(st.reencoded_cells, 0u);
    EXPECT_EQ(st.regular_cells, 2u * 16 + 8);
    EXPECT_EQ(st.regenerator_fetches, 0u);
}

TEST(merge, settled_groups_fetch_k_chunks_per_half)
{
    // {16, 8}; four departures downgrade the g16 into g8 + g4 and the new
    // g8 merges with the old one. No member holds a replica any more, so
    // the regenerator fetches k1 chunks of each half for the 8 cells of 8
    // heights, plus k1 cold chunks.
    Harness h(64, 200, DataMode::materialized);
    h.join(24);
    h.cluster.settle();
    const auto g16 = only_group(h.cluster, 16).members;
    const auto before = h.cluster.stats();
    for (size_t i = 0; i < 4; ++i)
        h.cluster.leave(g16[i]);
    EXPECT_EQ(h.cluster.census(), (std::vector<uint32_t>{16, 4}));
    const auto& st = h.cluster.stats();
    EXPECT_EQ(st.merges - before.merges, 1u);
    EXPECT_EQ(st.local_regenerations, before.local_regenerations);
    EXPECT_EQ(st.data_holder_push_bytes, before.data_holder_push_bytes);
    EXPECT_EQ(st.regenerator_fetches - before.regenerator_fetches, 8u * 8 + 4);
    for (uint64_t height = 1; height <= 64; ++height)
        ASSERT_TRUE(h.cluster.recover_block(only_group(h.cluster, 16).id, height)) << height;
}

TEST(merge, zero_encoded_batches_is_trivial)
{
    Harness h(10, 0, DataMode::materialized, 100);
    h.join(8);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{8});
    const auto& led = h.cluster.network().ledger();
    EXPECT_EQ(led[dht::Traffic::upgrade].bytes, 0u);
    EXPECT_EQ(led[dht::Traffic::upgrade].messages, 0u);
    EXPECT_TRUE(h.cluster.groups()[0].strips.empty());
}

TEST(merge, blocks_survive_any_k_losses)
{
    Harness h(48, 60, DataMode::materialized);
    h.join(8);
    const auto& g = h.cluster.groups()[0];
    ASSERT_EQ(g.nominal, 8u);
    std::mt19937_64 rng{7};
    for (int trial = 0; trial < 20; ++trial)
    {
        auto members = g.members;
        std::shuffle(members.begin(), members.end(), rng);
        for (uint32_t i = 0; i < g.k(); ++i)
            h.cluster.set_online(members[i], false);
        expect_all_blocks(h.cluster, g, h.chain);
        for (uint32_t i = 0; i < g.k(); ++i)
            h.cluster.set_online(members[i], true);
    }
    h.cluster.set_online(g.members[0], false);
    for (uint32_t i = 1; i <= g.k(); ++i)
        h.cluster.set_online(g.members[i], false);
    test::expect_code(ErrorCode::unavailable, [&] { h.cluster.recover_block(g.id, 1); });
}

TEST(merge, cold_root_is_preserved)
{
    Harness h(16, 300, DataMode::materialized);
    h.join(16);
    const auto& g = h.cluster.groups()[0];
    ASSERT_EQ(g.nominal, 16u);
    EXPECT_EQ(cold::decode_cold(g.cold, h.cluster.network()).root_digest(), h.base.root_digest());
    expect_all_keys(h.cluster, g, h.base, 300);
}

TEST(merge, diverged_cold_roots_are_refused)
{
    Harness h(16, 30, DataMode::materialized);
    h.join(4);
    auto other = make_trie(30, 5);
    h.cluster.set_cold_base(&other);
    h.join(3);
    test::expect_code(ErrorCode::divergence, [&] { h.join(1); });
}

TEST(downgrade, thirty_two_losing_eight_splits_sixteen_eight)
{
    Harness h(32, 120, DataMode::materialized);
    h.join(32);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{32});
    auto members = h.cluster.groups()[0].members;
    for (int i = 0; i < 7; ++i)
        h.cluster.leave(members[static_cast<size_t>(3 * i)]);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{32});
    expect_all_blocks(h.cluster, h.cluster.groups()[0], h.chain);
    h.cluster.leave(members[30]);
    ASSERT_EQ(h.cluster.census(), (std::vector<uint32_t>{16, 8}));
    EXPECT_EQ(h.cluster.stats().downgrades, 1u);
    EXPECT_TRUE(h.cluster.staging().empty());
    for (const auto& g : h.cluster.groups())
    {
        EXPECT_EQ(g.members.size(), g.nominal);
        expect_all_blocks(h.cluster, g, h.chain);
        expect_all_keys(h.cluster, g, h.base, 120);
        EXPECT_EQ(cold::decode_cold(g.cold, h.cluster.network()).root_digest(), h.base.root_digest());
    }
    // survivors sorted by id: the lowest quarter forms the small group
    const auto& small = only_group(h.cluster, 8);
    const auto& large = only_group(h.cluster, 16);
    EXPECT_LT(small.members.back(), large.members.front());
}

TEST(downgrade, sixty_four_losing_sixteen_splits_thirty_two_sixteen)
{
    Harness h(64, 100, DataMode::accounting);
    h.join(64);
    auto members = h.cluster.groups()[0].members;
    for (int i = 0; i < 16; ++i)
        h.cluster.leave(members[static_cast<size_t>(4 * i)]);
    EXPECT_EQ(h.cluster.census(), (std::vector<uint32_t>{32, 16}));
    EXPECT_GT(h.cluster.network().ledger()[dht::Traffic::downgrade].bytes, 0u);
}

TEST(downgrade, eight_losing_one_stays_intact)
{
    Harness h(32, 50, DataMode::materialized);
    h.join(8);
    const auto before = h.cluster.network().ledger();
    h.cluster.leave(h.cluster.groups()[0].members[2]);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{8});
    EXPECT_EQ(h.cluster.network().ledger()[dht::Traffic::downgrade].bytes, before[dht::Traffic::downgrade].bytes);
    expect_all_blocks(h.cluster, h.cluster.groups()[0], h.chain);
    expect_all_keys(h.cluster, h.cluster.groups()[0], h.base, 50);
}

TEST(downgrade, small_parts_fall_back_to_staging)
{
    Harness h(16, 20, DataMode::materialized);
    h.join(8);
    auto members = h.cluster.groups()[0].members;
    h.cluster.leave(members[0]);
    h.cluster.leave(members[1]);
    // 8 -> 4 + 2; the pair goes to staging with a full download each
    EXPECT_EQ(h.cluster.census(), std::vector<uint32_t>{4});
    EXPECT_EQ(h.cluster.staging().size(), 2u);
    EXPECT_GE(h.cluster.network().ledger()[dht::Traffic::downgrade].bytes, 2 * kReplica);
    expect_all_blocks(h.cluster, h.cluster.groups()[0], h.chain);
}

TEST(downgrade, upgrade_then_downgrade_round_trip)
{
    Harness h(40, 150, DataMode::materialized);
    h.join(16);
    auto members = h.cluster.groups()[0].members;
    for (int i = 0; i < 4; ++i)
        h.cluster.leave(members[static_cast<size_t>(i * 4 + 1)]);
    ASSERT_EQ(h.cluster.census(), (std::vector<uint32_t>{8, 4}));
    for (const auto& g : h.cluster.groups())
    {
        EXPECT_EQ(cold::decode_cold(g.cold, h.cluster.network()).root_digest(), h.base.root_digest());
        expect_all_blocks(h.cluster, g, h.chain);
    }
    h.join(4);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{16});
    const auto& g = h.cluster.groups()[0];
    EXPECT_EQ(cold::decode_cold(g.cold, h.cluster.network()).root_digest(), h.base.root_digest());
    expect_all_blocks(h.cluster, g, h.chain);
}

TEST(cold_refresh, new_base_is_served_after_refresh)
{
    Harness h(16, 100, DataMode::materialized);
    h.join(12);
    auto next = make_trie(140, 3);
    h.cluster.set_cold_base(&next);
    h.cluster.refresh_cold();
    EXPECT_GT(h.cluster.network().ledger()[dht::Traffic::fetch].bytes, 0u);
    for (const auto& g : h.cluster.groups())
        expect_all_keys(h.cluster, g, next, 140);
}

TEST(blocks, pending_batches_encode_as_the_chain_grows)
{
    auto chain = make_chain(20);
    auto base = make_trie(10);
    Cluster c{chain, ClusterConfig{DataMode::materialized, 10, [] { return kReplica; }}};
    c.set_cold_base(&base);
    for (uint64_t i = 0; i < 8; ++i)
        c.admit(node(i));
    EXPECT_EQ(c.groups()[0].encoded_upto, 10u);
    std::mt19937_64 rng{2};
    for (int i = 0; i < 15; ++i)
    {
        chain.append(test::random_bytes(rng, 40));
        c.encode_pending();
    }
    EXPECT_EQ(c.groups()[0].encoded_upto, 24u);
    expect_all_blocks(c, c.groups()[0], chain);
}

TEST(stabilization, random_churn_keeps_sizes_distinct)
{
    Harness h(40, 60, DataMode::accounting);
    std::mt19937_64 rng{11};
    std::vector<dht::NodeId> live;
    for (int step = 0; step < 600; ++step)
    {
        const bool join = live.size() < 8 || rng() % 3 != 0;
        if (join)
        {
            live.push_back(node(h.next));
            h.join(1);
        }
        else
        {
            const auto i = rng() % live.size();
            h.cluster.leave(live[i]);
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
        }
        const auto census = h.cluster.census();
        std::set<uint32_t> distinct(census.begin(), census.end());
        ASSERT_EQ(distinct.size(), census.size()) << "step " << step;
        uint64_t nominal = 0, departed = 0;
        for (const auto& g : h.cluster.groups())
        {
            ASSERT_TRUE(std::has_single_bit(g.nominal) && g.nominal >= 4);
            ASSERT_LT(g.departed() * 4, g.nominal);
            nominal += g.nominal;
            departed += g.departed();
        }
        ASSERT_EQ(h.cluster.node_count(), live.size());
        ASSERT_LE(h.cluster.staging().size(), 3u);
        const auto grouped = live.size() - h.cluster.staging().size();
        ASSERT_EQ(nominal - departed, grouped);
        if (departed == 0)
            ASSERT_EQ(static_cast<size_t>(std::popcount(grouped)), census.size());
        if (live.size() >= 4)
            ASSERT_LE(census.size(), static_cast<size_t>(std::ceil(std::log2(double(live.size())))));
    }
}

TEST(accounting, matches_materialized_transfers)
{
    Harness real(48, 200, DataMode::materialized);
    Harness acct(48, 200, DataMode::accounting);
    for (auto* h : {&real, &acct})
    {
        h->join(32);
        auto members = h->cluster.groups()[0].members;
        for (int i = 0; i < 8; ++i)
            h->cluster.leave(members[static_cast<size_t>(i * 3)]);
        h->join(8);
    }
    EXPECT_EQ(real.cluster.census(), acct.cluster.census());
    const auto& a = real.cluster.network().ledger();
    const auto& b = acct.cluster.network().ledger();
    EXPECT_EQ(a[dht::Traffic::join].bytes, b[dht::Traffic::join].bytes);
    EXPECT_EQ(a[dht::Traffic::upgrade].bytes, b[dht::Traffic::upgrade].bytes);
    EXPECT_EQ(a[dht::Traffic::upgrade].messages, b[dht::Traffic::upgrade].messages);
    const double down_a = double(a[dht::Traffic::downgrade].bytes);
    const double down_b = double(b[dht::Traffic::downgrade].bytes);
    EXPECT_NEAR(down_a, down_b, 0.05 * down_a);
    EXPECT_EQ(real.cluster.encoded_bytes_total(), acct.cluster.encoded_bytes_total());
}

TEST(merge, departed_holders_are_replaced)
{
    Harness h(32, 90, DataMode::materialized);
    h.join(8);
    h.cluster.leave(h.cluster.groups()[0].members[3]);
    h.join(8);
    ASSERT_EQ(h.cluster.census(), std::vector<uint32_t>{16});
    const auto& g = h.cluster.groups()[0];
    EXPECT_EQ(g.departed(), 1u);
    EXPECT_GT(h.cluster.stats().data_holder_push_bytes, 0u);
    for (const auto& s : g.strips)
        for (const auto& holder : s.holders)
            EXPECT_TRUE(std::binary_search(g.members.begin(), g.members.end(), holder));
    expect_all_blocks(h.cluster, g, h.chain);
    expect_all_keys(h.cluster, g, h.base, 90);
}
