// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/chunk_dht.hpp>
#include <ecchain/cold_trie_codec.hpp>
#include <ecchain/ledger_store.hpp>
#include <ecchain/merkle_trie.hpp>

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

/// Group lifecycle over a shared chain and cold base.
///
/// Newcomers wait in staging with a full replica. Four staged nodes form a
/// group of four; groups of equal nominal size merge pairwise, oldest first,
/// until all sizes differ. A group whose departures reach a quarter of its
/// nominal size splits into groups of half and a quarter of that size, and
/// parts below four nodes fall back to staging.
///
/// Two data planes share the protocol code. Materialized clusters move real
/// chunks through the network and decode them; accounting clusters carry
/// only strip metadata (lengths, placement, stand-in hashes) and charge the
/// same bytes and messages.
namespace ecchain::groups
{
enum class DataMode : uint8_t
{
    materialized,
    accounting,
};

struct Group
{
    uint64_t id = 0;
    uint32_t nominal = 0;                 ///< power of two >= 4
    std::vector<dht::NodeId> members;     ///< live members, sorted
    uint64_t formed_seq = 0;
    uint64_t encoded_upto = 0;
    std::vector<ledger::LedgerStrip> strips;  ///< ascending, contiguous from height 1
    cold::ColdStrip cold;
    std::vector<cold::Bin> cold_bins;

    uint32_t k() const noexcept { return nominal / 2; }
    uint32_t departed() const noexcept { return nominal - static_cast<uint32_t>(members.size()); }
};

enum class EventKind : uint8_t
{
    form,
    merge,
    downgrade,
    to_staging,
};

struct Event
{
    EventKind kind = EventKind::form;
    uint64_t group = 0;               ///< resulting group (0 for to_staging)
    std::vector<uint64_t> sources;    ///< consumed groups
    uint32_t size = 0;                ///< nominal size of the result, or nodes staged
};

struct MaintenanceStats
{
    uint64_t merges = 0;
    uint64_t downgrades = 0;
    uint64_t regular_cells = 0;       ///< ledger cells merged without touching data chunks
    uint64_t reencoded_cells = 0;     ///< ledger cells rebuilt from scratch
    uint64_t regenerator_fetches = 0; ///< chunk fetches made while regenerating parity on merge
    uint64_t local_regenerations = 0; ///< merges regenerated from a member's full replica
    uint64_t data_holder_push_bytes = 0;  ///< data-chunk bytes pushed during merges
};

struct ClusterConfig
{
    DataMode mode = DataMode::materialized;
    uint64_t distance_D = 0;
    /// Size of a full replica; charged for every staging download.
    std::function<uint64_t()> replica_bytes;
};

class Cluster
{
public:
    Cluster(const ledger::Chain& chain, ClusterConfig config);

    /// Cold base every group encodes. May be null or empty.
    void set_cold_base(const trie::Trie* base) noexcept { base_ = base; }

    /// Adds a node to staging, charges its replica download as join and
    /// forms and merges groups. Throws Error{parameter} if it is present.
    void admit(const dht::NodeId& node);

    /// Permanent departure. Throws Error{parameter} for an unknown node.
    void leave(const dht::NodeId& node);

    /// Drops the full replicas fetched by nodes that have since joined a
    /// group. Until then such a node can regenerate merge chunks from its
    /// own copy. Staged nodes keep theirs.
    void settle();

    /// Temporary absence; does not count toward downgrade.
    void set_online(const dht::NodeId& node, bool online);

    /// Encodes newly eligible batches in every group. Local work, no traffic.
    void encode_pending();

    /// Re-encodes every group's cold strip from the current base. Each
    /// group's regenerator gathers k old chunks and pushes the new chunks;
    /// both are charged as fetch.
    void refresh_cold();

    /// Merges equal-size groups until all sizes are distinct.
    void try_merge();

    /// Recovers a block from the group's strips. Accounting clusters only
    /// check that k holders are reachable and return std::nullopt. Throws
    /// Error{unavailable} or Error{integrity}. Not charged.
    std::optional<ledger::Block> recover_block(uint64_t group_id, uint64_t height);

    /// Looks up a cold key through the group's strip. Accounting clusters
    /// only check reachability. Not charged.
    std::optional<cold::LookupResult> lookup_cold(uint64_t group_id, const trie::Key& key);

    const std::vector<Group>& groups() const noexcept { return groups_; }
    const Group& group(uint64_t id) const;
    const std::vector<dht::NodeId>& staging() const noexcept { return staging_; }
    size_t node_count() const noexcept;
    std::vector<uint32_t> census() const;

    /// Encoded bytes (ledger strips and cold strip) held per live node.
    std::map<dht::NodeId, uint64_t> encoded_bytes_by_node() const;
    uint64_t encoded_bytes_total() const;

    dht::Network& network() noexcept { return net_; }
    const dht::Network& network() const noexcept { return net_; }
    const std::vector<Event>& events() const noexcept { return events_; }
    const MaintenanceStats& stats() const noexcept { return stats_; }
    DataMode mode() const noexcept { return cfg_.mode; }

private:
    struct Located
    {
        bool staged = false;
        size_t group = 0;
    };
    std::optional<Located> locate(const dht::NodeId& node) const;

    void form_from_staging();
    void catch_up(Group& g, uint64_t upto);
    void encode_cold_local(Group& g);
    Group merge(Group g1, Group g2);
    void merge_ledger(const Group& g1, const Group& g2, Group& out);
    void merge_cold(const Group& g1, const Group& g2, Group& out);
    void downgrade(size_t index);
    /// Re-encodes old's data for `members`; `reader` already holds it and
    /// pushes every chunk it does not keep.
    Group rebuild(const Group& old, std::vector<dht::NodeId> members, uint32_t nominal, const dht::NodeId& reader,
        std::vector<cold::Bin> bins);

    std::vector<codec::Chunk> collect(const codec::Strip& strip, std::span<const dht::NodeId> holders,
        const dht::NodeId& reader, dht::Traffic kind);
    void push(const codec::Chunk& chunk, uint64_t bytes, const dht::NodeId& from, const dht::NodeId& to,
        dht::Traffic kind);
    void release_strip(const codec::Strip& strip, std::span<const dht::NodeId> holders);
    void encode_group(Group& g, const ledger::HeightRange& r);
    cold::ColdEncoding cold_encoding(const Digest& root, const std::vector<cold::Bin>& bins, uint64_t tag) const;
    /// Default placement on the group's live members; stores every chunk
    /// and charges a push for each one not held by `source` (if given).
    void place_cold(Group& g, cold::ColdEncoding enc, std::vector<cold::Bin> bins,
        const std::optional<dht::NodeId>& source, dht::Traffic kind);
    dht::NodeId regenerator(std::span<const dht::NodeId> preferred, std::span<const dht::NodeId> members) const;
    /// A reachable member still holding a full replica, from `preferred`
    /// when possible.
    std::optional<dht::NodeId> replica_holder(std::span<const dht::NodeId> members,
        std::span<const dht::NodeId> preferred = {}) const;

    bool reachable(const dht::NodeId& n) const { return net_.online(n); }
    uint64_t replica() const { return cfg_.replica_bytes ? cfg_.replica_bytes() : 0; }
    bool real() const noexcept { return cfg_.mode == DataMode::materialized; }

    const ledger::Chain* chain_;
    ClusterConfig cfg_;
    const trie::Trie* base_ = nullptr;
    dht::Network net_;
    std::vector<Group> groups_;
    std::vector<dht::NodeId> staging_;
    std::set<dht::NodeId> replicas_;
    std::vector<Event> events_;
    MaintenanceStats stats_;
    uint64_t fetch_count_ = 0;
    uint64_t next_id_ = 1;
    uint64_t seq_ = 0;
};

}  // namespace ecchain::groups
