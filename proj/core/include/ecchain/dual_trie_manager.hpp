// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/cold_trie_codec.hpp>
#include <ecchain/merkle_trie.hpp>

#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

/// Hot/cold state classification driven by access recency and frequency.
///
/// Every access sets timer = max(h + delta_T, creation + ceil(count / F)).
/// A state whose timer equals the current height after the block's accesses
/// moves to the cold side. Cold-side changes collect in an overlay that the
/// owner folds into the encoded cold trie at epoch boundaries.
namespace ecchain::state
{
using Address = trie::Key;

struct Rational
{
    uint64_t num = 1;
    uint64_t den = 1;
};

struct ExpiryParams
{
    uint64_t delta_T = 100;
    Rational F{1, 10};

    /// Throws Error{config} unless delta_T >= 1 and F > 0.
    void validate() const;
};

/// ceil(count / F) in exact integer arithmetic.
uint64_t frequency_term(uint64_t count, Rational F);

/// max(h + delta_T, creation + ceil(count / F)).
uint64_t expiry_timer(uint64_t h, uint64_t creation, uint64_t count, const ExpiryParams& p);

struct AccessMeta
{
    uint64_t access_time = 0;
    uint64_t creation_height = 0;
    uint64_t timer = 0;
};

/// Read access to the encoded cold base.
class ColdReader
{
public:
    virtual ~ColdReader() = default;
    virtual cold::LookupResult lookup(const Address& addr) = 0;
};

/// Serves lookups straight from a trie held in memory.
class TrieColdReader final : public ColdReader
{
public:
    explicit TrieColdReader(const trie::Trie& base) : base_{&base} {}
    cold::LookupResult lookup(const Address& addr) override;

private:
    const trie::Trie* base_;
};

struct BlockAccess
{
    uint64_t height = 0;
    std::vector<Address> access;
    std::vector<std::pair<Address, Bytes>> create;
};

struct BlockResult
{
    Digest hot_root{};
    std::vector<Address> mined;
    std::vector<Address> created;
    std::vector<Address> expired;
};

struct ColdDelta
{
    std::map<Address, Bytes> insert;
    std::set<Address> remove;

    bool empty() const noexcept { return insert.empty() && remove.empty(); }
};

/// Applies a delta to a cold trie.
trie::Trie apply_delta(trie::Trie base, const ColdDelta& d);

class DualTrie
{
public:
    /// `reader` serves the cold base whose root is `cold_root`; it may be
    /// null while the cold base is empty.
    DualTrie(ExpiryParams params, Digest cold_root = zero_digest, ColdReader* reader = nullptr);

    /// Runs one block: accesses in listed order (created addresses not in
    /// the access list are accessed after it), then the expiry sweep.
    /// Throws Error{unknown_state} for an access to an address found in
    /// neither trie and not being created, Error{collision} when creating
    /// an existing address, Error{precondition} if heights skip.
    BlockResult process_block(const BlockAccess& block);

    /// Moves a cold state into the hot trie. Throws Error{precondition} if
    /// the address is not cold and Error{integrity} if the fetched proof
    /// fails against the cold root.
    Bytes mine(const Address& addr);

    /// Inserts a fresh state at height h. Throws Error{collision} if it is
    /// hot or cold.
    void create(const Address& addr, Bytes value, uint64_t h);

    /// Moves every hot address whose timer is h, in ascending order.
    std::vector<Address> expire_due(uint64_t h);

    bool is_hot(const Address& addr) const { return hot_.contains(addr); }

    /// Cold membership through the overlay, then the cold base. May fetch.
    bool is_cold(const Address& addr);

    /// Cold base plus overlay, in memory; used by owners that hold the base.
    trie::Trie apply_overlay(const trie::Trie& base) const { return apply_delta(base, overlay_); }

    /// Hands the overlay to the owner and switches to a new cold base.
    ColdDelta take_overlay(Digest new_cold_root, ColdReader* reader);

    const trie::Trie& hot() const noexcept { return hot_; }
    const ColdDelta& overlay() const noexcept { return overlay_; }
    const Digest& cold_root() const noexcept { return cold_root_; }
    const ExpiryParams& params() const noexcept { return params_; }
    uint64_t height() const noexcept { return height_; }
    const std::unordered_map<Address, AccessMeta, DigestHash>& meta() const noexcept { return meta_; }
    const std::map<uint64_t, std::set<Address>>& timer_index() const noexcept { return timers_; }

    /// Fetches from the cold base served so far.
    uint64_t cold_fetches() const noexcept { return cold_fetches_; }

private:
    void touch(const Address& addr, uint64_t h);
    std::optional<cold::LookupResult> base_lookup(const Address& addr);

    ExpiryParams params_;
    trie::Trie hot_;
    Digest cold_root_{};
    ColdReader* reader_ = nullptr;
    ColdDelta overlay_;
    std::unordered_map<Address, AccessMeta, DigestHash> meta_;
    std::map<uint64_t, std::set<Address>> timers_;
    uint64_t height_ = 0;
    uint64_t cold_fetches_ = 0;
};

}  // namespace ecchain::state
