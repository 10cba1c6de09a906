// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/chunk_dht.hpp>

#include <algorithm>
#include <numeric>

namespace ecchain::dht
{
NodeId make_node_id(uint64_t nonce)
{
    ByteWriter w;
    w.raw(ByteView{reinterpret_cast<const uint8_t*>("ecchain-node"), 12});
    w.u64(nonce);
    return {sha256(w.bytes()), nonce};
}

Digest rendezvous_distance(const Digest& hash, const NodeId& node)
{
    std::array<uint8_t, 64> buf;
    std::copy(hash.begin(), hash.end(), buf.begin());
    std::copy(node.id.begin(), node.id.end(), buf.begin() + 32);
    return sha256(buf);
}

std::vector<NodeId> closest_peers(const Digest& hash, std::span<const NodeId> scope)
{
    std::vector<std::pair<Digest, NodeId>> scored;
    scored.reserve(scope.size());
    for (const auto& n : scope)
        scored.emplace_back(rendezvous_distance(hash, n), n);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first < b.first;
        return a.second.id < b.second.id;
    });
    std::vector<NodeId> out;
    out.reserve(scored.size());
    for (auto& [d, n] : scored)
        out.push_back(n);
    return out;
}

int PlacementTable::index_of(const NodeId& node) const
{
    for (size_t i = 0; i < holders.size(); ++i)
        if (holders[i] == node)
            return static_cast<int>(i);
    return -1;
}

namespace
{
PlacementTable greedy_assign(const codec::Strip& strip, std::span<const NodeId> group, size_t cap)
{
    const size_t n = strip.chunk_hashes.size();
    std::vector<std::vector<NodeId>> ranking(n);
    for (size_t j = 0; j < n; ++j)
        ranking[j] = closest_peers(strip.chunk_hashes[j], group);

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return rendezvous_distance(strip.chunk_hashes[a], ranking[a].front()) <
               rendezvous_distance(strip.chunk_hashes[b], ranking[b].front());
    });

    PlacementTable table;
    table.strip_id = strip.strip_id;
    table.holders.resize(n);
    std::unordered_map<NodeId, size_t, NodeIdHash> load;
    for (auto j : order)
        for (const auto& candidate : ranking[j])
            if (load[candidate] < cap)
            {
                ++load[candidate];
                table.holders[j] = candidate;
                break;
            }
    return table;
}
}  // namespace

PlacementTable assign_strip(const codec::Strip& strip, std::span<const NodeId> group)
{
    const size_t n = strip.chunk_hashes.size();
    if (group.size() != n)
        throw Error{ErrorCode::parameter, "group size " + std::to_string(group.size()) +
                                              " does not match strip width " + std::to_string(n)};
    return greedy_assign(strip, group, 1);
}

PlacementTable assign_strip_capped(const codec::Strip& strip, std::span<const NodeId> group)
{
    if (group.empty())
        throw Error{ErrorCode::parameter, "cannot place a strip on an empty group"};
    const size_t n = strip.chunk_hashes.size();
    return greedy_assign(strip, group, (n + group.size() - 1) / group.size());
}

void Network::add_node(const NodeId& node)
{
    stores_.try_emplace(node);
}

void Network::remove_node(const NodeId& node)
{
    stores_.erase(node);
    offline_.erase(node);
}

void Network::set_online(const NodeId& node, bool online)
{
    if (online)
        offline_.erase(node);
    else
        offline_.insert(node);
}

bool Network::online(const NodeId& node) const
{
    return stores_.contains(node) && !offline_.contains(node);
}

void Network::store(const NodeId& holder, const codec::Chunk& chunk)
{
    auto it = stores_.find(holder);
    if (it == stores_.end())
        throw Error{ErrorCode::parameter, "store on unknown node"};
    auto& slot = it->second[chunk.content_hash];
    if (slot.refs == 0)
        slot.chunk = chunk;
    ++slot.refs;
}

void Network::drop(const NodeId& holder, const Digest& chunk_hash)
{
    auto it = stores_.find(holder);
    if (it == stores_.end())
        return;
    auto slot = it->second.find(chunk_hash);
    if (slot == it->second.end())
        return;
    if (--slot->second.refs == 0)
        it->second.erase(slot);
}

bool Network::holds(const NodeId& holder, const Digest& chunk_hash) const
{
    auto it = stores_.find(holder);
    return it != stores_.end() && it->second.contains(chunk_hash);
}

codec::Chunk Network::get(const Digest& chunk_hash, const NodeId& holder, Traffic kind)
{
    if (!online(holder))
        throw Error{ErrorCode::unavailable, "holder of chunk " + to_hex(chunk_hash).substr(0, 12) + " is offline"};
    auto chunk = local(chunk_hash, holder);
    auto& counter = ledger_[kind];
    counter.bytes += chunk.payload.size();
    counter.messages += 2;
    return chunk;
}

codec::Chunk Network::local(const Digest& chunk_hash, const NodeId& holder) const
{
    auto it = stores_.find(holder);
    if (it == stores_.end())
        throw Error{ErrorCode::unavailable, "holder has left the network"};
    auto slot = it->second.find(chunk_hash);
    if (slot == it->second.end())
        throw Error{ErrorCode::unavailable, "holder does not store chunk " + to_hex(chunk_hash).substr(0, 12)};
    if (sha256(slot->second.chunk.payload) != chunk_hash)
        throw Error{ErrorCode::corrupt_chunk, "chunk " + std::to_string(slot->second.chunk.index) +
                                                  " returned bytes that do not match its hash"};
    return slot->second.chunk;
}

void Network::charge(Traffic kind, uint64_t bytes, uint64_t messages)
{
    auto& counter = ledger_[kind];
    counter.bytes += bytes;
    counter.messages += messages;
}

void Network::corrupt(const NodeId& holder, const Digest& chunk_hash)
{
    auto& payload = stores_.at(holder).at(chunk_hash).chunk.payload;
    if (payload.empty())
        payload.push_back(0xff);
    else
        payload[0] ^= 0xff;
}

uint64_t Network::stored_bytes(const NodeId& node) const
{
    auto it = stores_.find(node);
    if (it == stores_.end())
        return 0;
    uint64_t total = 0;
    for (const auto& [hash, slot] : it->second)
        total += slot.chunk.payload.size() * slot.refs;
    return total;
}

}  // namespace ecchain::dht
