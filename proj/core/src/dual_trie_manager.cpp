// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/dual_trie_manager.hpp>

#include <algorithm>

namespace ecchain::state
{
void ExpiryParams::validate() const
{
    if (delta_T < 1)
        throw Error{ErrorCode::config, "delta_t must be at least 1"};
    if (F.num == 0 || F.den == 0)
        throw Error{ErrorCode::config, "F must be a positive fraction"};
}

uint64_t frequency_term(uint64_t count, Rational F)
{
    return (count * F.den + F.num - 1) / F.num;
}

uint64_t expiry_timer(uint64_t h, uint64_t creation, uint64_t count, const ExpiryParams& p)
{
    return std::max(h + p.delta_T, creation + frequency_term(count, p.F));
}

cold::LookupResult TrieColdReader::lookup(const Address& addr)
{
    cold::LookupResult r;
    r.proof = base_->prove(addr);
    r.value = base_->get(addr);
    r.chunks_fetched = 1;
    return r;
}

trie::Trie apply_delta(trie::Trie base, const ColdDelta& d)
{
    for (const auto& a : d.remove)
        base.remove(a);
    for (const auto& [a, v] : d.insert)
        base.put(a, v);
    return base;
}

DualTrie::DualTrie(ExpiryParams params, Digest cold_root, ColdReader* reader)
  : params_{params}, cold_root_{cold_root}, reader_{reader}
{
    params_.validate();
}

std::optional<cold::LookupResult> DualTrie::base_lookup(const Address& addr)
{
    if (cold_root_ == zero_digest)
        return std::nullopt;
    if (!reader_)
        throw Error{ErrorCode::unavailable, "no reader for the cold base"};
    auto r = reader_->lookup(addr);
    ++cold_fetches_;
    const auto check = trie::verify_proof(cold_root_, addr, r.proof);
    const bool present = check.verdict == trie::ProofVerdict::present;
    if (check.verdict == trie::ProofVerdict::invalid || present != r.value.has_value() ||
        (present && check.value != *r.value))
        throw Error{ErrorCode::integrity, "cold proof for " + to_hex(addr).substr(0, 12) + " fails against the cold root"};
    if (!r.value)
        return std::nullopt;
    return r;
}

bool DualTrie::is_cold(const Address& addr)
{
    if (overlay_.insert.contains(addr))
        return true;
    if (overlay_.remove.contains(addr))
        return false;
    return base_lookup(addr).has_value();
}

Bytes DualTrie::mine(const Address& addr)
{
    if (hot_.contains(addr))
        throw Error{ErrorCode::precondition, "address is already hot"};
    Bytes value;
    if (auto it = overlay_.insert.find(addr); it != overlay_.insert.end())
    {
        value = std::move(it->second);
        overlay_.insert.erase(it);
    }
    else
    {
        std::optional<cold::LookupResult> r;
        if (!overlay_.remove.contains(addr))
            r = base_lookup(addr);
        if (!r)
            throw Error{ErrorCode::precondition, "address " + to_hex(addr).substr(0, 12) + " is not in the cold trie"};
        value = std::move(*r->value);
        overlay_.remove.insert(addr);
    }
    hot_.put(addr, value);
    return value;
}

void DualTrie::create(const Address& addr, Bytes value, uint64_t h)
{
    if (hot_.contains(addr) || is_cold(addr))
        throw Error{ErrorCode::collision, "address " + to_hex(addr).substr(0, 12) + " already exists"};
    hot_.put(addr, std::move(value));
    meta_[addr] = {0, h, 0};
}

void DualTrie::touch(const Address& addr, uint64_t h)
{
    auto& m = meta_[addr];
    if (m.timer != 0)
        if (auto it = timers_.find(m.timer); it != timers_.end())
        {
            it->second.erase(addr);
            if (it->second.empty())
                timers_.erase(it);
        }
    ++m.access_time;
    m.timer = expiry_timer(h, m.creation_height, m.access_time, params_);
    timers_[m.timer].insert(addr);
}

BlockResult DualTrie::process_block(const BlockAccess& block)
{
    const auto h = block.height;
    if (height_ != 0 && h != height_ + 1)
        throw Error{ErrorCode::precondition, "block height " + std::to_string(h) + " does not follow " +
                                                 std::to_string(height_)};
    height_ = h;

    std::unordered_map<Address, const Bytes*, DigestHash> creating;
    for (const auto& [a, v] : block.create)
        creating.emplace(a, &v);
    std::vector<Address> order = block.access;
    {
        std::unordered_set<Address, DigestHash> listed(block.access.begin(), block.access.end());
        for (const auto& [a, v] : block.create)
            if (!listed.contains(a))
                order.push_back(a);
    }

    BlockResult out;
    for (const auto& addr : order)
    {
        auto c = creating.find(addr);
        if (!hot_.contains(addr))
        {
            if (c != creating.end())
            {
                create(addr, *c->second, h);
                out.created.push_back(addr);
            }
            else if (is_cold(addr))
            {
                mine(addr);
                out.mined.push_back(addr);
            }
            else
            {
                throw Error{ErrorCode::unknown_state, "address " + to_hex(addr).substr(0, 12) +
                                                          " is in neither trie at height " + std::to_string(h)};
            }
        }
        else if (c != creating.end())
        {
            throw Error{ErrorCode::collision, "address " + to_hex(addr).substr(0, 12) + " already exists"};
        }
        if (c != creating.end())
            creating.erase(c);
        touch(addr, h);
    }
    out.expired = expire_due(h);
    out.hot_root = hot_.root_digest();
    return out;
}

std::vector<Address> DualTrie::expire_due(uint64_t h)
{
    std::vector<Address> moved;
    auto it = timers_.find(h);
    if (it == timers_.end())
        return moved;
    for (const auto& addr : it->second)
    {
        auto value = hot_.get(addr);
        hot_.remove(addr);
        overlay_.insert[addr] = std::move(*value);
        moved.push_back(addr);
    }
    timers_.erase(it);
    return moved;
}

ColdDelta DualTrie::take_overlay(Digest new_cold_root, ColdReader* reader)
{
    cold_root_ = new_cold_root;
    reader_ = reader;
    return std::exchange(overlay_, {});
}

}  // namespace ecchain::state
