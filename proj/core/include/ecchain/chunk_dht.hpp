// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/erasure_codec.hpp>
#include <ecchain/types.hpp>

#include <array>
#include <compare>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

/// Simulated content-addressed chunk placement and retrieval.
///
/// Routing is an oracle over the in-process network: a fetch is one
/// request/response pair and its payload bytes are charged to a bandwidth
/// ledger. Distance between a content hash and a node is the rendezvous
/// weight H(hash | node id), compared as a 256-bit big-endian integer.
/// Placement inside a group is a greedy matching on that distance, which
/// guarantees one chunk per member.
namespace ecchain::dht
{
struct NodeId
{
    Digest id{};
    uint64_t handle = 0;

    friend bool operator==(const NodeId& a, const NodeId& b) noexcept { return a.id == b.id; }
    friend std::strong_ordering operator<=>(const NodeId& a, const NodeId& b) noexcept
    {
        return a.id <=> b.id;
    }
};

struct NodeIdHash
{
    size_t operator()(const NodeId& n) const noexcept { return DigestHash{}(n.id); }
};

/// Node identity derived from a join nonce.
NodeId make_node_id(uint64_t nonce);

Digest rendezvous_distance(const Digest& hash, const NodeId& node);

/// Members of `scope` by ascending distance to `hash`, ties by id.
std::vector<NodeId> closest_peers(const Digest& hash, std::span<const NodeId> scope);

struct PlacementTable
{
    Digest strip_id{};
    std::vector<NodeId> holders;  ///< chunk index -> holder

    /// Chunk index held by `node`, or -1.
    int index_of(const NodeId& node) const;
};

/// Bijective chunk-to-member assignment. Chunks are taken in order of their
/// best (smallest) distance to any member; each goes to its closest member
/// not yet assigned. Throws Error{parameter} if |group| != k + m.
PlacementTable assign_strip(const codec::Strip& strip, std::span<const NodeId> group);

/// Same greedy matching when the group is short of members: each member
/// takes at most ceil((k + m) / |group|) chunks. Throws Error{parameter}
/// on an empty group.
PlacementTable assign_strip_capped(const codec::Strip& strip, std::span<const NodeId> group);

enum class Traffic : uint8_t
{
    join,
    upgrade,
    downgrade,
    fetch,
};

struct TrafficCounter
{
    uint64_t bytes = 0;
    uint64_t messages = 0;
};

struct BandwidthLedger
{
    std::array<TrafficCounter, 4> by_kind{};

    TrafficCounter& operator[](Traffic t) noexcept { return by_kind[static_cast<size_t>(t)]; }
    const TrafficCounter& operator[](Traffic t) const noexcept { return by_kind[static_cast<size_t>(t)]; }
};

/// The simulated network: per-node chunk stores, liveness and traffic.
class Network
{
public:
    void add_node(const NodeId& node);
    void remove_node(const NodeId& node);
    bool has_node(const NodeId& node) const { return stores_.contains(node); }

    /// Temporary absence: the node keeps its data but fetches from it fail.
    void set_online(const NodeId& node, bool online);
    bool online(const NodeId& node) const;

    /// Local write; no traffic is charged.
    void store(const NodeId& holder, const codec::Chunk& chunk);
    void drop(const NodeId& holder, const Digest& chunk_hash);
    bool holds(const NodeId& holder, const Digest& chunk_hash) const;

    /// Fetches and verifies a chunk. Throws Error{unavailable} when the
    /// holder is gone, offline or lacks the chunk, Error{corrupt_chunk} when
    /// the payload does not hash to `chunk_hash`.
    codec::Chunk get(const Digest& chunk_hash, const NodeId& holder, Traffic kind = Traffic::fetch);

    /// Reads a chunk the caller itself holds. Verified, not charged.
    codec::Chunk local(const Digest& chunk_hash, const NodeId& holder) const;

    /// Charges a non-chunk transfer (full-replica download, parity push).
    void charge(Traffic kind, uint64_t bytes, uint64_t messages = 1);

    /// Overwrites a stored payload in place; test hook for byzantine holders.
    void corrupt(const NodeId& holder, const Digest& chunk_hash);

    uint64_t stored_bytes(const NodeId& node) const;
    const BandwidthLedger& ledger() const noexcept { return ledger_; }
    void reset_ledger() noexcept { ledger_ = {}; }
    void set_ledger(const BandwidthLedger& l) noexcept { ledger_ = l; }

private:
    struct Slot
    {
        codec::Chunk chunk;
        uint32_t refs = 0;
    };
    using Store = std::unordered_map<Digest, Slot, DigestHash>;

    std::unordered_map<NodeId, Store, NodeIdHash> stores_;
    std::unordered_set<NodeId, NodeIdHash> offline_;
    BandwidthLedger ledger_;
};

}  // namespace ecchain::dht
