// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/ledger_store.hpp>

#include <algorithm>

namespace ecchain::ledger
{
Digest block_hash(uint64_t height, const Digest& parent, ByteView payload)
{
    ByteWriter w;
    w.u64(height);
    w.digest(parent);
    w.raw(payload);
    return sha256(w.bytes());
}

Block make_block(uint64_t height, const Digest& parent, Bytes payload)
{
    Block b{height, parent, std::move(payload), {}};
    b.block_hash = block_hash(b.height, b.parent_hash, b.payload);
    return b;
}

Bytes encode_block(const Block& b)
{
    ByteWriter w;
    w.u64(b.height);
    w.digest(b.parent_hash);
    w.blob32(b.payload);
    return w.take();
}

Block decode_block(ByteView bytes)
{
    ByteReader r{bytes};
    const auto height = r.u64();
    const auto parent = r.digest();
    auto payload = r.blob32();
    if (r.remaining() != 0)
        throw Error{ErrorCode::parse, "trailing bytes after block"};
    return make_block(height, parent, Bytes(payload.begin(), payload.end()));
}

const Block& Chain::append(Bytes payload)
{
    const auto height = tip() + 1;
    const Digest parent = blocks_.empty() ? zero_digest : blocks_.back().block_hash;
    blocks_.push_back(make_block(height, parent, std::move(payload)));
    prefix_.push_back(prefix_.back() + encoded_block_size(blocks_.back().payload.size()));
    return blocks_.back();
}

const Block& Chain::at(uint64_t height) const
{
    if (height == 0 || height > tip())
        throw Error{ErrorCode::missing_data, "no block at height " + std::to_string(height)};
    return blocks_[height - 1];
}

uint64_t Chain::serialized_bytes(uint64_t first, uint64_t last) const
{
    if (first > last)
        return 0;
    if (first == 0 || last > tip())
        throw Error{ErrorCode::missing_data, "height range " + std::to_string(first) + ".." +
                                                 std::to_string(last) + " is outside the chain"};
    return prefix_[last] - prefix_[first - 1];
}

std::vector<HeightRange> select_encoding_range(uint64_t tip, uint64_t last_encoded, const EncodingPolicy& policy)
{
    if (policy.k == 0)
        throw Error{ErrorCode::parameter, "batch size k must be at least 1"};
    std::vector<HeightRange> out;
    if (tip < policy.distance_D)
        return out;
    const uint64_t limit = tip - policy.distance_D;
    uint64_t next = last_encoded + 1;
    while (true)
    {
        const uint64_t cell_end = ((next - 1) / policy.k + 1) * policy.k;
        if (cell_end > limit)
            break;
        out.push_back({next, cell_end});
        next = cell_end + 1;
    }
    return out;
}

Bytes batch_blob(const Chain& chain, const HeightRange& r)
{
    ByteWriter w;
    w.u32(static_cast<uint32_t>(r.size()));
    for (uint64_t h = r.first; h <= r.last; ++h)
        w.blob32(encode_block(chain.at(h)));
    return w.take();
}

uint64_t batch_blob_size(const Chain& chain, const HeightRange& r)
{
    return 4 + 4 * r.size() + chain.serialized_bytes(r.first, r.last);
}

std::vector<Block> parse_batch(ByteView blob)
{
    ByteReader r{blob};
    const auto n = r.u32();
    std::vector<Block> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
        out.push_back(decode_block(r.blob32()));
    if (r.remaining() != 0)
        throw Error{ErrorCode::parse, "trailing bytes after batch"};
    return out;
}

uint32_t select_leader(uint64_t epoch_seed, uint64_t height, size_t group_size)
{
    if (group_size == 0)
        throw Error{ErrorCode::parameter, "leader selection over an empty group"};
    ByteWriter w;
    w.u64(epoch_seed);
    w.u64(height);
    const auto d = sha256(w.bytes());
    uint64_t v = 0;
    for (size_t i = 0; i < 8; ++i)
        v = (v << 8) | d[i];
    return static_cast<uint32_t>(v % group_size);
}

uint64_t LedgerStrip::total_bytes() const
{
    uint64_t t = 0;
    for (uint32_t i = 0; i < strip.params.total(); ++i)
        t += chunk_bytes(i);
    return t;
}

uint64_t LedgerStrip::data_bytes() const
{
    uint64_t t = 0;
    for (uint32_t i = 0; i < strip.params.k; ++i)
        t += chunk_bytes(i);
    return t;
}

LedgerStrip encode_range(const Chain& chain, const HeightRange& r, std::span<const dht::NodeId> group,
    dht::Network* net, uint64_t tag)
{
    if (group.size() < 2 || group.size() % 2 != 0)
        throw Error{ErrorCode::parameter, "group size must be even and at least 2"};
    return encode_range(chain, r, static_cast<uint32_t>(group.size() / 2), group, net, tag);
}

LedgerStrip encode_range(const Chain& chain, const HeightRange& r, uint32_t k, std::span<const dht::NodeId> group,
    dht::Network* net, uint64_t tag)
{
    if (k == 0 || group.empty())
        throw Error{ErrorCode::parameter, "encoding needs k >= 1 and a non-empty group"};
    if (r.last > chain.tip())
    {
        std::string missing;
        for (uint64_t h = std::max(r.first, chain.tip() + 1); h <= r.last; ++h)
            missing += (missing.empty() ? "" : ",") + std::to_string(h);
        throw Error{ErrorCode::missing_data, "missing blocks at heights " + missing};
    }
    LedgerStrip out;
    out.range = r;
    out.segments.push_back({r, 0, k});

    std::vector<codec::Chunk> chunks;
    if (net)
    {
        auto enc = codec::encode(codec::pad_and_split(batch_blob(chain, r), k), {k, k});
        out.strip = std::move(enc.strip);
        chunks = std::move(enc.chunks);
    }
    else
    {
        out.strip.params = {k, k};
        out.strip.coding_length = codec::framed_chunk_length(batch_blob_size(chain, r), k);
        out.strip.data_lengths.assign(k, out.strip.coding_length);
        ByteWriter ids;
        for (uint32_t i = 0; i < 2 * k; ++i)
        {
            ByteWriter w;
            w.u64(tag);
            w.u64(r.first);
            w.u64(r.last);
            w.u32(i);
            out.strip.chunk_hashes.push_back(sha256(w.bytes()));
            ids.digest(out.strip.chunk_hashes.back());
        }
        out.strip.strip_id = sha256(ids.bytes());
    }
    out.holders = group.size() == 2 * size_t{k} ? dht::assign_strip(out.strip, group).holders
                                                : dht::assign_strip_capped(out.strip, group).holders;
    if (net)
        for (uint32_t i = 0; i < 2 * k; ++i)
            net->store(out.holders[i], chunks[i]);
    return out;
}

std::vector<LedgerStrip> encode_batches(std::span<const HeightRange> ranges, const Chain& chain,
    std::span<const dht::NodeId> group, dht::Network* net, uint64_t tag)
{
    std::vector<LedgerStrip> out;
    out.reserve(ranges.size());
    for (const auto& r : ranges)
        out.push_back(encode_range(chain, r, group, net, tag));
    return out;
}

Block recover_from_strip(const LedgerStrip& s, uint64_t height, const Digest& expected_hash, dht::Network& net,
    dht::Traffic kind)
{
    const auto seg = std::find_if(s.segments.begin(), s.segments.end(),
        [&](const Segment& g) { return g.range.contains(height); });
    if (seg == s.segments.end())
        throw Error{ErrorCode::missing_data, "strip does not cover height " + std::to_string(height)};

    std::vector<codec::Chunk> got;
    const auto k = s.strip.params.k;
    for (uint32_t i = 0; i < s.strip.params.total() && got.size() < k; ++i)
    {
        try
        {
            got.push_back(net.get(s.strip.chunk_hashes[i], s.holders[i], kind));
            got.back().index = i;
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::unavailable && e.code() != ErrorCode::corrupt_chunk)
                throw;
        }
    }
    if (got.size() < k)
        throw Error{ErrorCode::unavailable, "block " + std::to_string(height) + ": only " +
                                                std::to_string(got.size()) + " of " + std::to_string(k) +
                                                " chunks reachable"};
    const auto data = codec::decode(got, s.strip);
    const std::span<const Bytes> part{data.data() + seg->first_chunk, seg->chunk_count};
    const auto blocks = parse_batch(codec::join_and_unpad(part));
    const auto idx = height - seg->range.first;
    if (blocks.size() != seg->range.size() || blocks[idx].height != height ||
        blocks[idx].block_hash != expected_hash)
        throw Error{ErrorCode::integrity, "decoded block " + std::to_string(height) + " does not match its hash"};
    return blocks[idx];
}

Block recover_block(uint64_t height, const Chain& chain, uint64_t encoded_upto,
    std::span<const LedgerStrip> strips, dht::Network& net)
{
    if (height > encoded_upto)
        return chain.at(height);
    const auto it = std::find_if(strips.begin(), strips.end(),
        [&](const LedgerStrip& s) { return s.range.contains(height); });
    if (it == strips.end())
        throw Error{ErrorCode::missing_data, "no strip covers height " + std::to_string(height)};
    return recover_from_strip(*it, height, chain.at(height).block_hash, net);
}

}  // namespace ecchain::ledger
