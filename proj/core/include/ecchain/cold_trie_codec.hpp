// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/chunk_dht.hpp>
#include <ecchain/erasure_codec.hpp>
#include <ecchain/merkle_trie.hpp>

#include <map>
#include <optional>
#include <span>
#include <vector>

/// Erasure coding of the cold state trie.
///
/// The trie is cut into subtries along a frontier, the subtries are binned
/// into exactly k data chunks, and each chunk carries the Merkle path from
/// the trie root to every subtrie it holds, so a single chunk can answer a
/// lookup and prove where it came from. Branch nodes shared by several paths
/// of one chunk are stored once.
///
/// Data chunk layout, all integers big-endian:
///
///   [u32 subtrie_count][per subtrie: u32 len, bytes]
///   [u32 node_count][per node: u32 len, branch encoding]
///   [u32 path_count][per path: u32 len, bytes]
///   [u64 original_length]
///   zero padding up to the strip's chunk length
///
/// Subtrie bytes are trie::serialize_subtrie() output. Path bytes are
/// [u32 steps][per step: u8 slot, u32 node index]. original_length counts
/// every byte before the padding, trailer included.
namespace ecchain::cold
{
/// A subtrie cut out of the cold trie, addressed by its nibble prefix.
struct SubtrieEntry
{
    trie::Nibbles prefix;
    trie::NodePtr root;
    trie::MerklePath path;  ///< root of the full trie down to this subtrie's parent

    uint64_t size_bytes() const noexcept { return root ? root->subtree_bytes : 0; }
};

using Bin = std::vector<SubtrieEntry>;

struct ColdChunkPayload
{
    std::vector<Bytes> subtries;
    std::vector<Bytes> nodes;
    std::vector<Bytes> paths;
    uint64_t original_length = 0;
};

/// Serializes a payload; fills in original_length.
Bytes encode_payload(const ColdChunkPayload& payload);
ColdChunkPayload decode_payload(ByteView chunk);

Bytes encode_bin(const Bin& bin);

/// Parses a data chunk back into subtrie entries. Throws Error{integrity}
/// if the subtrie count and path count disagree, a path names a node the
/// chunk does not hold, or a subtrie is malformed.
Bin decode_bin(ByteView chunk);

/// Checks every embedded Merkle path against `cold_root` using only this
/// chunk's bytes.
bool verify_chunk_provenance(const Digest& cold_root, ByteView chunk);

struct SplitResult
{
    std::vector<Bin> bins;  ///< exactly k, some possibly empty
    std::map<trie::Nibbles, uint32_t> nibble_index;
};

/// Frontier expansion followed by size-balanced binning into k chunks.
///
/// Starting from {root}, the frontier is expanded until it holds at least k
/// entries or only leaves remain. When expanding every branch at once would
/// push the frontier past 4k entries, only the largest branch is expanded.
/// The entries, in prefix order, are then cut into k contiguous runs of
/// about equal encoded size; the largest entry is expanded while the
/// heaviest run exceeds the mean by more than a quarter.
SplitResult split_trie(const trie::Trie& t, uint32_t k);

/// Re-bins existing subtries into `new_k` chunks, where new_k / old_k (or its
/// inverse) is a power of two. Doubling splits each bin into two balanced
/// halves, kept adjacent (bin i -> 2i, 2i+1); halving concatenates adjacent
/// bins. Used by group upgrade and downgrade.
std::vector<Bin> rebin(std::vector<Bin> bins, uint32_t new_k);

std::map<trie::Nibbles, uint32_t> index_bins(const std::vector<Bin>& bins);

/// Strip metadata kept by every node of the group.
struct ColdStrip
{
    Digest cold_root{};
    codec::Strip strip;
    dht::PlacementTable placement;
    std::map<trie::Nibbles, uint32_t> nibble_index;

    bool empty() const noexcept { return cold_root == zero_digest; }
};

struct ColdEncoding
{
    ColdStrip meta;
    std::vector<codec::Chunk> chunks;
};

/// Encodes prepared bins with (k, k) RS; no placement.
ColdEncoding encode_bins(const Digest& cold_root, const std::vector<Bin>& bins);

/// split_trie + encode_bins with k = m.
ColdEncoding encode_trie(const trie::Trie& t, uint32_t k);

/// Throws Error{parameter} unless |group| is a power of two >= 4.
uint32_t group_k(size_t group_size);

/// Encodes the cold trie for a group with k = m = |g| / 2, assigns one chunk
/// per member and stores it there.
ColdStrip encode_cold(const trie::Trie& t, std::span<const dht::NodeId> group, dht::Network& net);

/// Places an already-encoded strip on `group` and stores the chunks.
ColdStrip place(ColdEncoding enc, std::span<const dht::NodeId> group, dht::Network& net);

/// Drops this strip's chunks from their holders.
void release(const ColdStrip& s, dht::Network& net);

/// Fetches any k verified chunks (data first). Throws Error{unavailable}.
std::vector<codec::Chunk> gather(const ColdStrip& s, dht::Network& net,
    dht::Traffic kind = dht::Traffic::fetch);

/// Fetches the data chunks, decoding if any are missing.
std::vector<Bytes> fetch_data_chunks(const ColdStrip& s, dht::Network& net,
    dht::Traffic kind = dht::Traffic::fetch);

/// Rebuilds the trie from the subtries and spine paths of k data chunks.
/// Throws Error{integrity} if the result does not hash to `cold_root`.
trie::Trie reassemble(const Digest& cold_root, std::span<const Bytes> data_chunks);

/// Full decode through the network.
trie::Trie decode_cold(const ColdStrip& s, dht::Network& net);

struct LookupResult
{
    std::optional<Bytes> value;
    trie::Proof proof;          ///< verifies against cold_root
    uint32_t chunks_fetched = 0;
    bool used_fallback = false;
};

/// Targeted lookup: fetches only the data chunk covering the key's prefix,
/// falling back to a k-chunk decode when that holder is unavailable.
LookupResult lookup_cold(const trie::Key& key, const ColdStrip& s, dht::Network& net);

}  // namespace ecchain::cold
