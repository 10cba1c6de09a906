// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/types.hpp>

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

/// Hexary Merkle trie over 256-bit keys (64 nibbles).
///
/// Nodes are immutable and shared between versions, so every mutation yields
/// a new root while older roots stay readable. There are two node kinds:
///
///   leaf:   0x00 | u8 nibble_count | nibbles packed high-first | u32 len | value
///   branch: 0x01 | u16 slot bitmap (bit i = slot i) | child digests in slot order
///
/// Keys are fixed length, so a branch never carries a value. There is no
/// path compression: a node covering one key is a leaf, a node covering more
/// is a branch, which makes the shape a pure function of the key set.
namespace ecchain::trie
{
using Key = Digest;
using Nibbles = std::vector<uint8_t>;

inline constexpr size_t key_nibbles = 64;

inline uint8_t nibble(const Key& key, size_t i) noexcept
{
    const uint8_t b = key[i / 2];
    return (i % 2 == 0) ? static_cast<uint8_t>(b >> 4) : static_cast<uint8_t>(b & 0x0f);
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node
{
    enum class Kind : uint8_t
    {
        leaf,
        branch,
    };

    Kind kind = Kind::leaf;
    Nibbles suffix;                     ///< leaf only
    Bytes value;                        ///< leaf only
    std::array<NodePtr, 16> children;   ///< branch only

    Bytes encoding;                     ///< canonical serialization
    Digest digest{};                    ///< sha256(encoding)
    uint64_t subtree_bytes = 0;         ///< encoding sizes summed over the subtree
    uint64_t key_count = 0;

    bool is_leaf() const noexcept { return kind == Kind::leaf; }
    size_t child_count() const noexcept;
};

NodePtr make_leaf(Nibbles suffix, Bytes value);
NodePtr make_branch(const std::array<NodePtr, 16>& children);

struct PathStep
{
    Bytes node;        ///< canonical encoding of a branch
    uint8_t slot = 0;  ///< child slot taken toward the target
};

/// Branch encodings from the root down to a target's parent.
using MerklePath = std::vector<PathStep>;

/// Membership or absence proof. `terminal` is the node where the lookup
/// stopped: the matching leaf, a leaf with a different suffix, or a branch
/// whose slot for the key is empty. Empty for the empty trie.
struct Proof
{
    MerklePath path;
    Bytes terminal;
};

enum class ProofVerdict
{
    present,
    absent,
    invalid,
};

struct ProofCheck
{
    ProofVerdict verdict = ProofVerdict::invalid;
    Bytes value;
};

/// Replays `path` upward from `target` and compares against `root`.
/// Returns false on any mismatch or malformed step.
bool verify_path(const Digest& root, const MerklePath& path, const Digest& target);

/// Checks a proof for `key` against `root`.
ProofCheck verify_proof(const Digest& root, const Key& key, const Proof& proof);

/// Child digests in slot order parsed from a branch encoding.
std::array<std::optional<Digest>, 16> parse_branch(ByteView encoding);

struct ChildInfo
{
    uint8_t slot = 0;
    Digest digest{};
    uint64_t size_bytes = 0;
};

/// A self-contained subtrie: preorder list of [u32 len | encoding].
struct Subtrie
{
    Digest root{};
    Bytes nodes;
    uint64_t size_bytes = 0;
};

Subtrie serialize_subtrie(const NodePtr& root);

/// Rebuilds a subtrie, checking every child digest. Throws Error{integrity}
/// on mismatch and Error{parse} on malformed input.
NodePtr parse_subtrie(ByteView nodes);

/// Reparses a single node encoding together with already-built children.
NodePtr rebuild_node(ByteView encoding, const std::array<NodePtr, 16>& children);

class Trie
{
public:
    Trie() = default;
    explicit Trie(NodePtr root) : root_{std::move(root)} {}

    Digest put(const Key& key, Bytes value);
    std::optional<Bytes> get(const Key& key) const;
    bool contains(const Key& key) const { return get(key).has_value(); }
    Digest remove(const Key& key);

    Digest root_digest() const noexcept { return root_ ? root_->digest : zero_digest; }
    const NodePtr& root() const noexcept { return root_; }
    bool empty() const noexcept { return !root_; }
    uint64_t size() const noexcept { return root_ ? root_->key_count : 0; }

    /// Total bytes of all node encodings.
    uint64_t byte_size() const noexcept { return root_ ? root_->subtree_bytes : 0; }

    Proof prove(const Key& key) const;

    /// Node reachable from the root by following `prefix`, or null.
    NodePtr descend(const Nibbles& prefix) const;

    /// Path from the root to the parent of the node at `prefix`.
    MerklePath path_to(const Nibbles& prefix) const;

    /// Finds a node by digest. Throws Error{missing_node}.
    NodePtr find(const Digest& digest) const;

    /// Children of the node with `digest`, slot order, with subtree sizes.
    std::vector<ChildInfo> enumerate_children(const Digest& digest) const;

    /// Visits every key/value in ascending key order.
    void for_each(const std::function<void(const Key&, const Bytes&)>& f) const;

private:
    NodePtr root_;
};

}  // namespace ecchain::trie
