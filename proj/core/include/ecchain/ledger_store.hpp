// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/chunk_dht.hpp>
#include <ecchain/erasure_codec.hpp>
#include <ecchain/types.hpp>

#include <span>
#include <vector>

namespace ecchain::ledger
{
struct Block
{
    uint64_t height = 0;
    Digest parent_hash{};
    Bytes payload;
    Digest block_hash{};
};

/// H(u64 height | parent | payload).
Digest block_hash(uint64_t height, const Digest& parent, ByteView payload);
Block make_block(uint64_t height, const Digest& parent, Bytes payload);

/// [u64 height][32 parent][u32 len][payload]
Bytes encode_block(const Block& b);
Block decode_block(ByteView bytes);
inline uint64_t encoded_block_size(uint64_t payload_size) noexcept { return 8 + 32 + 4 + payload_size; }

/// In-memory block sequence starting at height 1. Block 1 has a zero parent.
class Chain
{
public:
    const Block& append(Bytes payload);
    uint64_t tip() const noexcept { return blocks_.size(); }
    const Block& at(uint64_t height) const;

    /// Sum of encode_block sizes over [first, last].
    uint64_t serialized_bytes(uint64_t first, uint64_t last) const;
    uint64_t serialized_bytes() const { return serialized_bytes(1, tip()); }

private:
    std::vector<Block> blocks_;
    std::vector<uint64_t> prefix_{0};
};

struct HeightRange
{
    uint64_t first = 0;
    uint64_t last = 0;

    uint64_t size() const noexcept { return last - first + 1; }
    bool contains(uint64_t h) const noexcept { return h >= first && h <= last; }
    friend bool operator==(const HeightRange&, const HeightRange&) = default;
};

struct EncodingPolicy
{
    uint64_t distance_D = 10'000;
    uint32_t k = 2;
};

/// Batches of policy.k blocks on the grid anchored at height 1, each lying
/// entirely at or below tip - D and above last_encoded. If last_encoded is
/// not on the grid the first range only completes its grid cell.
std::vector<HeightRange> select_encoding_range(uint64_t tip, uint64_t last_encoded, const EncodingPolicy& policy);

/// [u32 count][per block: u32 len, encode_block bytes]
Bytes batch_blob(const Chain& chain, const HeightRange& r);
uint64_t batch_blob_size(const Chain& chain, const HeightRange& r);
std::vector<Block> parse_batch(ByteView blob);

/// H(u64 seed | u64 height) mod group_size. Throws Error{parameter} on an
/// empty group.
uint32_t select_leader(uint64_t epoch_seed, uint64_t height, size_t group_size);

/// A run of data chunks inside a strip holding one framed batch blob.
struct Segment
{
    HeightRange range;
    uint32_t first_chunk = 0;
    uint32_t chunk_count = 0;
};

/// One encoded stretch of the ledger as held by a group. A freshly encoded
/// strip has a single segment; a merged one has two, one per parent group.
struct LedgerStrip
{
    HeightRange range;
    std::vector<Segment> segments;
    codec::Strip strip;
    std::vector<dht::NodeId> holders;  ///< chunk index -> member

    uint64_t chunk_bytes(uint32_t i) const { return strip.stored_bytes(i); }
    uint64_t total_bytes() const;
    uint64_t data_bytes() const;
};

/// Encodes one range for `group` with k = m = |group|/2 and places it.
/// With a network the chunks are real and stored on their holders; without
/// one only lengths and placement are computed (chunk hashes are then
/// stand-ins derived from `tag`, the range and the index).
LedgerStrip encode_range(const Chain& chain, const HeightRange& r, std::span<const dht::NodeId> group,
    dht::Network* net, uint64_t tag = 0);

/// As above with an explicit k, for groups short of members; chunks are
/// then spread with dht::assign_strip_capped.
LedgerStrip encode_range(const Chain& chain, const HeightRange& r, uint32_t k, std::span<const dht::NodeId> group,
    dht::Network* net, uint64_t tag = 0);

/// Encodes each range; see encode_range. Throws Error{missing_data} listing
/// heights beyond the chain tip.
std::vector<LedgerStrip> encode_batches(std::span<const HeightRange> ranges, const Chain& chain,
    std::span<const dht::NodeId> group, dht::Network* net, uint64_t tag = 0);

/// Decodes the strip and returns the block at `height`, checked against
/// `expected_hash`. Throws Error{unavailable} with fewer than k reachable
/// chunks and Error{integrity} on a hash mismatch.
Block recover_from_strip(const LedgerStrip& s, uint64_t height, const Digest& expected_hash, dht::Network& net,
    dht::Traffic kind = dht::Traffic::fetch);

/// Recovers a block: from the local chain when above `encoded_upto`,
/// otherwise through the strip covering it.
Block recover_block(uint64_t height, const Chain& chain, uint64_t encoded_upto,
    std::span<const LedgerStrip> strips, dht::Network& net);

}  // namespace ecchain::ledger
