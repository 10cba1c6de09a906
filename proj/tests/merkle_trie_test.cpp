// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/merkle_trie.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace ecchain;
using namespace ecchain::trie;

namespace
{
Bytes value_of(uint64_t i)
{
    ByteWriter w;
    w.u64(i);
    return w.take();
}

std::vector<Key> random_keys(std::mt19937_64& rng, size_t n)
{
    std::vector<Key> keys;
    for (size_t i = 0; i < n; ++i)
        keys.push_back(test::random_digest(rng));
    return keys;
}

uint64_t traverse_bytes(const NodePtr& n)
{
    if (!n)
        return 0;
    uint64_t total = n->encoding.size();
    if (!n->is_leaf())
        for (const auto& c : n->children)
            total += traverse_bytes(c);
    return total;
}
}  // namespace

TEST(merkle_trie, put_then_get)
{
    Trie t;
    std::mt19937_64 rng{1};
    const auto k = test::random_digest(rng);
    t.put(k, {1, 2, 3});
    EXPECT_EQ(t.get(k), (Bytes{1, 2, 3}));
    EXPECT_FALSE(t.get(test::random_digest(rng)).has_value());
    EXPECT_EQ(t.size(), 1u);
}

TEST(merkle_trie, overwrite_changes_root)
{
    Trie t;
    std::mt19937_64 rng{2};
    const auto k = test::random_digest(rng);
    const auto r1 = t.put(k, {1});
    const auto r2 = t.put(k, {2});
    EXPECT_NE(r1, r2);
    EXPECT_EQ(t.put(k, {1}), r1);
}

TEST(merkle_trie, insertion_order_independent)
{
    std::mt19937_64 rng{3};
    auto keys = random_keys(rng, 500);
    Trie a, b;
    for (size_t i = 0; i < keys.size(); ++i)
        a.put(keys[i], value_of(i));
    std::vector<size_t> order(keys.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order)
        b.put(keys[i], value_of(i));
    EXPECT_EQ(a.root_digest(), b.root_digest());
}

TEST(merkle_trie, remove_half_matches_rebuild)
{
    std::mt19937_64 rng{4};
    auto keys = random_keys(rng, 10000);
    std::map<Key, Bytes> reference;
    Trie t;
    for (size_t i = 0; i < keys.size(); ++i)
    {
        t.put(keys[i], value_of(i));
        reference[keys[i]] = value_of(i);
    }
    for (size_t i = 0; i < keys.size(); i += 2)
    {
        t.remove(keys[i]);
        reference.erase(keys[i]);
    }
    Trie rebuilt;
    for (const auto& [k, v] : reference)
        rebuilt.put(k, v);
    EXPECT_EQ(t.root_digest(), rebuilt.root_digest());
    EXPECT_EQ(t.size(), reference.size());

    std::map<Key, Bytes> visited;
    t.for_each([&](const Key& k, const Bytes& v) { visited[k] = v; });
    EXPECT_EQ(visited, reference);
}

TEST(merkle_trie, remove_all_gives_empty_root)
{
    std::mt19937_64 rng{5};
    auto keys = random_keys(rng, 50);
    Trie t;
    for (const auto& k : keys)
        t.put(k, {7});
    for (const auto& k : keys)
        t.remove(k);
    EXPECT_TRUE(t.empty());
    EXPECT_EQ(t.root_digest(), zero_digest);
}

TEST(merkle_trie, old_roots_stay_readable)
{
    std::mt19937_64 rng{6};
    Trie t;
    const auto k = test::random_digest(rng);
    t.put(k, {1});
    Trie snapshot = t;
    t.put(k, {2});
    EXPECT_EQ(snapshot.get(k), (Bytes{1}));
    EXPECT_EQ(t.get(k), (Bytes{2}));
}

TEST(merkle_trie, membership_proof_verifies)
{
    std::mt19937_64 rng{7};
    auto keys = random_keys(rng, 300);
    Trie t;
    for (size_t i = 0; i < keys.size(); ++i)
        t.put(keys[i], value_of(i));
    for (size_t i = 0; i < keys.size(); ++i)
    {
        const auto check = verify_proof(t.root_digest(), keys[i], t.prove(keys[i]));
        ASSERT_EQ(check.verdict, ProofVerdict::present);
        ASSERT_EQ(check.value, value_of(i));
    }
}

TEST(merkle_trie, absence_proof_matches_reference_membership)
{
    std::mt19937_64 rng{8};
    auto keys = random_keys(rng, 300);
    Trie t;
    for (const auto& k : keys)
        t.put(k, {1});
    // Near misses: same first bytes, different tail, hit the leaf-divergence case.
    for (int i = 0; i < 300; ++i)
    {
        Key probe = (i % 2 == 0) ? test::random_digest(rng) : keys[i];
        if (i % 2 == 1)
            probe[31] ^= 0x5a;
        const bool member = std::find(keys.begin(), keys.end(), probe) != keys.end();
        const auto check = verify_proof(t.root_digest(), probe, t.prove(probe));
        ASSERT_EQ(check.verdict, member ? ProofVerdict::present : ProofVerdict::absent);
    }
    Trie empty;
    EXPECT_EQ(verify_proof(zero_digest, keys[0], empty.prove(keys[0])).verdict, ProofVerdict::absent);
}

TEST(merkle_trie, tampered_proofs_never_verify)
{
    std::mt19937_64 rng{9};
    auto keys = random_keys(rng, 2000);
    Trie t;
    for (size_t i = 0; i < keys.size(); ++i)
        t.put(keys[i], value_of(i));
    int mutations = 0;
    for (int trial = 0; trial < 1200; ++trial)
    {
        const auto& key = keys[rng() % keys.size()];
        auto proof = t.prove(key);
        const size_t target = rng() % (proof.path.size() + 1);
        Bytes& victim = target < proof.path.size() ? proof.path[target].node : proof.terminal;
        victim[rng() % victim.size()] ^= static_cast<uint8_t>(1 + rng() % 255);
        const auto check = verify_proof(t.root_digest(), key, proof);
        ASSERT_EQ(check.verdict, ProofVerdict::invalid);
        ++mutations;
    }
    EXPECT_GE(mutations, 1000);
}

TEST(merkle_trie, verify_path_detects_slot_swap)
{
    std::mt19937_64 rng{10};
    Trie t;
    for (const auto& k : random_keys(rng, 100))
        t.put(k, {1});
    auto kids = t.enumerate_children(t.root_digest());
    ASSERT_GE(kids.size(), 2u);
    const MerklePath path{{t.root()->encoding, kids[0].slot}};
    EXPECT_TRUE(verify_path(t.root_digest(), path, kids[0].digest));
    EXPECT_FALSE(verify_path(t.root_digest(), path, kids[1].digest));
}

TEST(merkle_trie, root_has_sixteen_children_and_sizes_add_up)
{
    std::mt19937_64 rng{11};
    Trie t;
    for (const auto& k : random_keys(rng, 2000))
        t.put(k, {1, 2, 3, 4});
    const auto kids = t.enumerate_children(t.root_digest());
    ASSERT_EQ(kids.size(), 16u);
    uint64_t sum = t.root()->encoding.size();
    for (size_t i = 0; i < kids.size(); ++i)
    {
        EXPECT_EQ(kids[i].slot, i);
        EXPECT_EQ(kids[i].size_bytes, traverse_bytes(t.find(kids[i].digest)));
        sum += kids[i].size_bytes;
    }
    EXPECT_EQ(sum, t.byte_size());
    EXPECT_EQ(traverse_bytes(t.root()), t.byte_size());
}

TEST(merkle_trie, leaf_has_no_children_and_unknown_digest_errors)
{
    Trie t;
    t.put(Key{}, {1});
    EXPECT_TRUE(t.enumerate_children(t.root_digest()).empty());
    try
    {
        t.enumerate_children(sha256(std::string_view{"nope"}));
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::missing_node);
    }
}

TEST(merkle_trie, first_level_subtries_are_balanced)
{
    std::mt19937_64 rng{12};
    Trie t;
    for (const auto& k : random_keys(rng, 10000))
        t.put(k, Bytes(32, 0xee));
    const auto kids = t.enumerate_children(t.root_digest());
    ASSERT_EQ(kids.size(), 16u);
    double mean = 0;
    for (const auto& c : kids)
        mean += static_cast<double>(c.size_bytes);
    mean /= 16;
    double var = 0;
    for (const auto& c : kids)
        var += std::pow(static_cast<double>(c.size_bytes) - mean, 2);
    const double rsd = std::sqrt(var / 16) / mean;
    EXPECT_LT(rsd, 0.10);
}

TEST(merkle_trie, subtrie_serialization_round_trips)
{
    std::mt19937_64 rng{13};
    Trie t;
    for (const auto& k : random_keys(rng, 700))
        t.put(k, {9, 9});
    const auto st = serialize_subtrie(t.root());
    EXPECT_EQ(st.root, t.root_digest());
    const auto back = parse_subtrie(st.nodes);
    EXPECT_EQ(back->digest, t.root_digest());
    EXPECT_EQ(back->subtree_bytes, t.byte_size());

    auto bad = st.nodes;
    bad[bad.size() - 1] ^= 1;
    EXPECT_THROW(parse_subtrie(bad), Error);
}
