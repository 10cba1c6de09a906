// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/chunk_dht.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace ecchain;
using namespace ecchain::dht;

namespace
{
std::vector<NodeId> make_group(uint64_t first, size_t n)
{
    std::vector<NodeId> g;
    for (size_t i = 0; i < n; ++i)
        g.push_back(make_node_id(first + i));
    return g;
}

codec::EncodedStrip random_strip(std::mt19937_64& rng, uint32_t k, uint32_t m)
{
    std::vector<Bytes> data;
    for (uint32_t i = 0; i < k; ++i)
        data.push_back(test::random_bytes(rng, 16));
    return codec::encode(data, {k, m});
}
}  // namespace

TEST(closest_peers, single_member_scope)
{
    const auto g = make_group(1, 1);
    std::mt19937_64 rng{1};
    const auto out = closest_peers(test::random_digest(rng), g);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], g[0]);
}

TEST(closest_peers, ordering_is_total_and_by_distance)
{
    const auto g = make_group(10, 16);
    std::mt19937_64 rng{2};
    for (int t = 0; t < 100; ++t)
    {
        const auto h = test::random_digest(rng);
        const auto out = closest_peers(h, g);
        ASSERT_EQ(out.size(), g.size());
        for (size_t i = 1; i < out.size(); ++i)
            ASSERT_LT(rendezvous_distance(h, out[i - 1]), rendezvous_distance(h, out[i]));
        std::vector<NodeId> reversed(g.rbegin(), g.rend());
        ASSERT_EQ(closest_peers(h, reversed), out);
    }
}

TEST(closest_peers, first_rank_is_near_uniform)
{
    const auto g = make_group(100, 8);
    std::mt19937_64 rng{0};
    std::map<uint64_t, int> wins;
    for (int t = 0; t < 10000; ++t)
        ++wins[closest_peers(test::random_digest(rng), g).front().handle];
    ASSERT_EQ(wins.size(), 8u);
    double chi2 = 0;
    for (const auto& [node, count] : wins)
        chi2 += (count - 1250.0) * (count - 1250.0) / 1250.0;
    RecordProperty("chi2", std::to_string(chi2));
    for (const auto& [node, count] : wins)
        EXPECT_NEAR(count, 1250, 120) << "node " << node;
}

TEST(assign_strip, bijection_over_many_strips)
{
    const auto g = make_group(200, 8);
    std::mt19937_64 rng{3};
    for (int t = 0; t < 1000; ++t)
    {
        const auto enc = random_strip(rng, 4, 4);
        const auto table = assign_strip(enc.strip, g);
        std::set<NodeId> distinct(table.holders.begin(), table.holders.end());
        ASSERT_EQ(distinct.size(), 8u);
    }
}

TEST(assign_strip, deterministic_and_order_free)
{
    auto g = make_group(300, 4);
    std::mt19937_64 rng{4};
    const auto enc = random_strip(rng, 2, 2);
    const auto a = assign_strip(enc.strip, g);
    std::reverse(g.begin(), g.end());
    const auto b = assign_strip(enc.strip, g);
    EXPECT_EQ(a.holders, b.holders);
    std::set<NodeId> members(g.begin(), g.end());
    std::set<NodeId> assigned(a.holders.begin(), a.holders.end());
    EXPECT_EQ(members, assigned);
}

TEST(assign_strip, wrong_group_size_rejected)
{
    std::mt19937_64 rng{5};
    const auto enc = random_strip(rng, 2, 2);
    try
    {
        assign_strip(enc.strip, make_group(1, 5));
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::parameter);
    }
}

TEST(network, fetch_is_verified_and_charged)
{
    std::mt19937_64 rng{6};
    const auto enc = random_strip(rng, 2, 2);
    const auto g = make_group(400, 4);
    const auto table = assign_strip(enc.strip, g);
    Network net;
    for (const auto& n : g)
        net.add_node(n);
    for (size_t i = 0; i < 4; ++i)
        net.store(table.holders[i], enc.chunks[i]);

    const auto c = net.get(enc.strip.chunk_hashes[1], table.holders[1]);
    EXPECT_EQ(c.payload, enc.chunks[1].payload);
    EXPECT_EQ(net.ledger()[Traffic::fetch].bytes, enc.chunks[1].payload.size());
    EXPECT_EQ(net.ledger()[Traffic::fetch].messages, 2u);
}

TEST(network, departed_or_offline_holder_is_unavailable)
{
    std::mt19937_64 rng{7};
    const auto enc = random_strip(rng, 2, 2);
    const auto g = make_group(500, 4);
    Network net;
    for (const auto& n : g)
        net.add_node(n);
    net.store(g[0], enc.chunks[0]);
    net.set_online(g[0], false);
    try
    {
        net.get(enc.strip.chunk_hashes[0], g[0]);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::unavailable);
    }
    net.set_online(g[0], true);
    EXPECT_NO_THROW(net.get(enc.strip.chunk_hashes[0], g[0]));
    net.remove_node(g[0]);
    EXPECT_THROW(net.get(enc.strip.chunk_hashes[0], g[0]), Error);
    EXPECT_EQ(net.ledger()[Traffic::fetch].messages, 2u);
}

TEST(network, wrong_bytes_are_corrupt)
{
    std::mt19937_64 rng{8};
    const auto enc = random_strip(rng, 2, 2);
    const auto g = make_group(600, 4);
    Network net;
    net.add_node(g[0]);
    net.store(g[0], enc.chunks[2]);
    net.corrupt(g[0], enc.strip.chunk_hashes[2]);
    try
    {
        net.get(enc.strip.chunk_hashes[2], g[0]);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::corrupt_chunk);
    }
    EXPECT_EQ(net.ledger()[Traffic::fetch].bytes, 0u);
}

TEST(network, stored_bytes_counts_each_reference)
{
    std::mt19937_64 rng{9};
    const auto enc = random_strip(rng, 2, 2);
    const auto n = make_node_id(1);
    Network net;
    net.add_node(n);
    net.store(n, enc.chunks[0]);
    net.store(n, enc.chunks[0]);
    EXPECT_EQ(net.stored_bytes(n), 2 * enc.chunks[0].payload.size());
    net.drop(n, enc.strip.chunk_hashes[0]);
    EXPECT_TRUE(net.holds(n, enc.strip.chunk_hashes[0]));
    net.drop(n, enc.strip.chunk_hashes[0]);
    EXPECT_FALSE(net.holds(n, enc.strip.chunk_hashes[0]));
}
