// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/cold_trie_codec.hpp>

#include <algorithm>
#include <bit>
#include <iterator>
#include <map>
#include <unordered_map>

namespace ecchain::cold
{
namespace
{
bool is_prefix_of(const trie::Nibbles& prefix, const trie::Key& key)
{
    for (size_t i = 0; i < prefix.size(); ++i)
        if (prefix[i] != trie::nibble(key, i))
            return false;
    return true;
}

size_t common_prefix(const trie::Nibbles& prefix, const trie::Key& key)
{
    size_t i = 0;
    while (i < prefix.size() && prefix[i] == trie::nibble(key, i))
        ++i;
    return i;
}

// Children of a branch entry as entries of their own.
std::vector<SubtrieEntry> expand(const SubtrieEntry& e)
{
    std::vector<SubtrieEntry> out;
    for (uint8_t s = 0; s < 16; ++s)
    {
        const auto& c = e.root->children[s];
        if (!c)
            continue;
        SubtrieEntry child;
        child.prefix = e.prefix;
        child.prefix.push_back(s);
        child.root = c;
        child.path = e.path;
        child.path.push_back({e.root->encoding, s});
        out.push_back(std::move(child));
    }
    return out;
}

bool larger_first(const SubtrieEntry& a, const SubtrieEntry& b)
{
    if (a.size_bytes() != b.size_bytes())
        return a.size_bytes() > b.size_bytes();
    return a.prefix < b.prefix;
}

bool by_prefix(const SubtrieEntry& a, const SubtrieEntry& b)
{
    return a.prefix < b.prefix;
}

size_t common_nibbles(const trie::Nibbles& a, const trie::Nibbles& b)
{
    size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i])
        ++i;
    return i;
}

// Bytes an entry adds to its chunk when it follows `prev` in prefix order.
// Spine nodes above the common prefix are already in the chunk.
uint64_t added_bytes(const SubtrieEntry& e, const SubtrieEntry* prev)
{
    uint64_t w = e.size_bytes() + 4 * e.root->key_count + 20 + 5 * e.path.size();
    const size_t from = prev ? common_nibbles(prev->prefix, e.prefix) + 1 : 0;
    for (size_t d = from; d < e.path.size(); ++d)
        w += e.path[d].node.size() + 4;
    return w;
}

struct Cut
{
    std::vector<size_t> bounds;  // k + 1 entry offsets
    std::vector<uint64_t> load;  // estimated chunk bytes
};

// Cuts prefix-ordered entries into k contiguous runs at the boundaries
// nearest the equal-size quantiles.
Cut cut(const std::vector<SubtrieEntry>& entries, uint32_t k)
{
    const size_t n = entries.size();
    std::vector<uint64_t> cum(n + 1, 0);
    for (size_t i = 0; i < n; ++i)
        cum[i + 1] = cum[i] + added_bytes(entries[i], i ? &entries[i - 1] : nullptr);
    Cut c;
    c.bounds.push_back(0);
    for (uint32_t j = 1; j < k; ++j)
    {
        const double target = static_cast<double>(cum[n]) * j / k;
        size_t end = c.bounds.back();
        while (end < n && static_cast<double>(cum[end + 1]) <= target)
            ++end;
        if (end < n && target - static_cast<double>(cum[end]) > static_cast<double>(cum[end + 1]) - target)
            ++end;
        c.bounds.push_back(end);
    }
    c.bounds.push_back(n);
    for (uint32_t j = 0; j < k; ++j)
    {
        const size_t lo = c.bounds[j], hi = c.bounds[j + 1];
        uint64_t load = 20;
        for (size_t i = lo; i < hi; ++i)
            load += added_bytes(entries[i], i > lo ? &entries[i - 1] : nullptr);
        c.load.push_back(load);
    }
    return c;
}

std::vector<Bin> pack(std::vector<SubtrieEntry> entries, uint32_t k)
{
    std::sort(entries.begin(), entries.end(), by_prefix);
    const auto c = cut(entries, k);
    std::vector<Bin> bins(k);
    for (uint32_t j = 0; j < k; ++j)
        for (size_t i = c.bounds[j]; i < c.bounds[j + 1]; ++i)
            bins[j].push_back(std::move(entries[i]));
    return bins;
}

// Splits one bin into two balanced halves, expanding its largest branch
// while it has fewer than two entries.
std::pair<Bin, Bin> halve(Bin bin)
{
    while (bin.size() < 2)
    {
        auto it = std::find_if(bin.begin(), bin.end(), [](const auto& e) { return !e.root->is_leaf(); });
        if (it == bin.end())
            break;
        auto kids = expand(*it);
        bin.erase(it);
        bin.insert(bin.end(), kids.begin(), kids.end());
    }
    auto two = pack(std::move(bin), 2);
    return {std::move(two[0]), std::move(two[1])};
}

trie::NodePtr resolve(const Digest& d, const std::unordered_map<Digest, trie::NodePtr, DigestHash>& built,
    const std::unordered_map<Digest, Bytes, DigestHash>& spine, size_t depth)
{
    if (auto it = built.find(d); it != built.end())
        return it->second;
    auto sp = spine.find(d);
    if (sp == spine.end() || depth > trie::key_nibbles)
        throw Error{ErrorCode::integrity, "cold trie node " + to_hex(d).substr(0, 12) + " missing from chunks"};
    const auto slots = trie::parse_branch(sp->second);
    std::array<trie::NodePtr, 16> kids{};
    for (size_t s = 0; s < 16; ++s)
        if (slots[s])
            kids[s] = resolve(*slots[s], built, spine, depth + 1);
    return trie::rebuild_node(sp->second, kids);
}

}  // namespace

namespace
{
trie::MerklePath decode_path(ByteView bytes, const std::vector<Bytes>& nodes)
{
    ByteReader r{bytes};
    const uint32_t n = r.u32();
    if (n > trie::key_nibbles)
        throw Error{ErrorCode::parse, "merkle path too long"};
    trie::MerklePath path;
    for (uint32_t i = 0; i < n; ++i)
    {
        trie::PathStep step;
        step.slot = r.u8();
        const uint32_t idx = r.u32();
        if (idx >= nodes.size())
            throw Error{ErrorCode::integrity, "merkle path names a node the chunk does not hold"};
        step.node = nodes[idx];
        path.push_back(std::move(step));
    }
    if (r.remaining() != 0)
        throw Error{ErrorCode::parse, "trailing bytes in merkle path"};
    return path;
}

void write_list(ByteWriter& w, const std::vector<Bytes>& items)
{
    w.u32(static_cast<uint32_t>(items.size()));
    for (const auto& b : items)
        w.blob32(b);
}

std::vector<Bytes> read_list(ByteReader& r)
{
    std::vector<Bytes> out;
    const uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i)
    {
        auto b = r.blob32();
        out.emplace_back(b.begin(), b.end());
    }
    return out;
}
}  // namespace

Bytes encode_payload(const ColdChunkPayload& payload)
{
    ByteWriter w;
    write_list(w, payload.subtries);
    write_list(w, payload.nodes);
    write_list(w, payload.paths);
    w.u64(w.bytes().size() + 8);
    return w.take();
}

ColdChunkPayload decode_payload(ByteView chunk)
{
    ByteReader r{chunk};
    ColdChunkPayload out;
    out.subtries = read_list(r);
    out.nodes = read_list(r);
    out.paths = read_list(r);
    out.original_length = r.u64();
    if (out.original_length != r.position())
        throw Error{ErrorCode::parse, "cold chunk length trailer does not match its contents"};
    for (size_t i = r.position(); i < chunk.size(); ++i)
        if (chunk[i] != 0)
            throw Error{ErrorCode::parse, "nonzero padding in cold chunk"};
    return out;
}

Bytes encode_bin(const Bin& bin)
{
    ColdChunkPayload p;
    std::map<Bytes, uint32_t> node_index;
    for (const auto& e : bin)
    {
        p.subtries.push_back(trie::serialize_subtrie(e.root).nodes);
        ByteWriter w;
        w.u32(static_cast<uint32_t>(e.path.size()));
        for (const auto& step : e.path)
        {
            const auto [it, fresh] = node_index.emplace(step.node, static_cast<uint32_t>(p.nodes.size()));
            if (fresh)
                p.nodes.push_back(step.node);
            w.u8(step.slot);
            w.u32(it->second);
        }
        p.paths.push_back(w.take());
    }
    return encode_payload(p);
}

Bin decode_bin(ByteView chunk)
{
    const auto p = decode_payload(chunk);
    if (p.subtries.size() != p.paths.size())
        throw Error{ErrorCode::integrity, "cold chunk has mismatched subtrie and path counts"};
    Bin bin;
    for (size_t i = 0; i < p.subtries.size(); ++i)
    {
        SubtrieEntry e;
        e.root = trie::parse_subtrie(p.subtries[i]);
        if (!e.root)
            throw Error{ErrorCode::integrity, "empty subtrie in cold chunk"};
        e.path = decode_path(p.paths[i], p.nodes);
        for (const auto& step : e.path)
            e.prefix.push_back(step.slot);
        bin.push_back(std::move(e));
    }
    return bin;
}

bool verify_chunk_provenance(const Digest& cold_root, ByteView chunk)
{
    try
    {
        for (const auto& e : decode_bin(chunk))
            if (!trie::verify_path(cold_root, e.path, e.root->digest))
                return false;
    }
    catch (const Error&)
    {
        return false;
    }
    return true;
}

SplitResult split_trie(const trie::Trie& t, uint32_t k)
{
    if (k == 0)
        throw Error{ErrorCode::parameter, "k must be at least 1"};
    SplitResult out;
    std::vector<SubtrieEntry> frontier;
    if (t.root())
        frontier.push_back({{}, t.root(), {}});

    while (frontier.size() < k)
    {
        size_t after_all = 0;
        bool any_branch = false;
        for (const auto& e : frontier)
        {
            after_all += e.root->is_leaf() ? 1 : e.root->child_count();
            any_branch |= !e.root->is_leaf();
        }
        if (!any_branch)
            break;

        std::vector<SubtrieEntry> next;
        if (after_all <= 4 * size_t{k})
        {
            for (auto& e : frontier)
            {
                if (e.root->is_leaf())
                    next.push_back(std::move(e));
                else
                    for (auto& c : expand(e))
                        next.push_back(std::move(c));
            }
        }
        else
        {
            // Expanding everything would overshoot; split the largest branch only.
            size_t largest = frontier.size();
            for (size_t i = 0; i < frontier.size(); ++i)
                if (!frontier[i].root->is_leaf() &&
                    (largest == frontier.size() || larger_first(frontier[i], frontier[largest])))
                    largest = i;
            for (size_t i = 0; i < frontier.size(); ++i)
            {
                if (i == largest)
                    for (auto& c : expand(frontier[i]))
                        next.push_back(std::move(c));
                else
                    next.push_back(std::move(frontier[i]));
            }
        }
        frontier = std::move(next);
    }

    // Refine the largest branch while the heaviest run stays lopsided.
    std::sort(frontier.begin(), frontier.end(), by_prefix);
    while (!frontier.empty())
    {
        const auto c = cut(frontier, k);
        uint64_t total = 0, hi = 0;
        for (const auto l : c.load)
        {
            total += l;
            hi = std::max(hi, l);
        }
        if (4 * hi * k <= 5 * total)
            break;
        auto largest = std::min_element(frontier.begin(), frontier.end(), larger_first);
        if (largest->root->is_leaf())
            break;
        auto kids = expand(*largest);
        const auto at = frontier.erase(largest);
        frontier.insert(at, std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
    }

    out.bins = pack(std::move(frontier), k);
    out.nibble_index = index_bins(out.bins);
    return out;
}

std::vector<Bin> rebin(std::vector<Bin> bins, uint32_t new_k)
{
    if (new_k == 0 || bins.empty())
        throw Error{ErrorCode::parameter, "rebin needs a non-empty bin set and new_k >= 1"};
    const auto old_k = static_cast<uint32_t>(bins.size());
    const uint32_t hi = std::max(old_k, new_k);
    const uint32_t lo = std::min(old_k, new_k);
    if (hi % lo != 0 || !std::has_single_bit(hi / lo))
        throw Error{ErrorCode::parameter, "bin counts must differ by a power of two"};

    while (bins.size() < new_k)
    {
        std::vector<Bin> next;
        for (auto& b : bins)
        {
            auto [a, c] = halve(std::move(b));
            next.push_back(std::move(a));
            next.push_back(std::move(c));
        }
        bins = std::move(next);
    }
    while (bins.size() > new_k)
    {
        std::vector<Bin> next;
        for (size_t i = 0; i < bins.size(); i += 2)
        {
            Bin merged = std::move(bins[i]);
            for (auto& e : bins[i + 1])
                merged.push_back(std::move(e));
            std::sort(merged.begin(), merged.end(), [](const auto& x, const auto& y) { return x.prefix < y.prefix; });
            next.push_back(std::move(merged));
        }
        bins = std::move(next);
    }
    return bins;
}

std::map<trie::Nibbles, uint32_t> index_bins(const std::vector<Bin>& bins)
{
    std::map<trie::Nibbles, uint32_t> index;
    for (size_t i = 0; i < bins.size(); ++i)
        for (const auto& e : bins[i])
            index[e.prefix] = static_cast<uint32_t>(i);
    return index;
}

ColdEncoding encode_bins(const Digest& cold_root, const std::vector<Bin>& bins)
{
    ColdEncoding out;
    out.meta.cold_root = cold_root;
    if (cold_root == zero_digest)
        return out;
    const auto k = static_cast<uint32_t>(bins.size());
    std::vector<Bytes> data;
    size_t len = 0;
    for (const auto& b : bins)
    {
        data.push_back(encode_bin(b));
        len = std::max(len, data.back().size());
    }
    for (auto& d : data)
        d.resize(len, 0);
    auto enc = codec::encode(data, {k, k});
    out.meta.strip = std::move(enc.strip);
    out.meta.nibble_index = index_bins(bins);
    out.chunks = std::move(enc.chunks);
    return out;
}

ColdEncoding encode_trie(const trie::Trie& t, uint32_t k)
{
    if (t.empty())
        return encode_bins(zero_digest, {});
    auto split = split_trie(t, k);
    return encode_bins(t.root_digest(), split.bins);
}

uint32_t group_k(size_t group_size)
{
    if (group_size < 4 || !std::has_single_bit(group_size))
        throw Error{ErrorCode::parameter, "group size must be a power of two >= 4, got " + std::to_string(group_size)};
    return static_cast<uint32_t>(group_size / 2);
}

ColdStrip place(ColdEncoding enc, std::span<const dht::NodeId> group, dht::Network& net)
{
    if (enc.meta.empty())
        return std::move(enc.meta);
    enc.meta.placement = dht::assign_strip(enc.meta.strip, group);
    for (size_t i = 0; i < enc.chunks.size(); ++i)
        net.store(enc.meta.placement.holders[i], enc.chunks[i]);
    return std::move(enc.meta);
}

ColdStrip encode_cold(const trie::Trie& t, std::span<const dht::NodeId> group, dht::Network& net)
{
    const auto k = group_k(group.size());
    return place(encode_trie(t, k), group, net);
}

void release(const ColdStrip& s, dht::Network& net)
{
    for (size_t i = 0; i < s.placement.holders.size(); ++i)
        net.drop(s.placement.holders[i], s.strip.chunk_hashes[i]);
}

std::vector<codec::Chunk> gather(const ColdStrip& s, dht::Network& net, dht::Traffic kind)
{
    std::vector<codec::Chunk> got;
    const auto k = s.strip.params.k;
    for (uint32_t i = 0; i < s.strip.params.total() && got.size() < k; ++i)
    {
        try
        {
            got.push_back(net.get(s.strip.chunk_hashes[i], s.placement.holders[i], kind));
            got.back().index = i;
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::unavailable && e.code() != ErrorCode::corrupt_chunk)
                throw;
        }
    }
    if (got.size() < k)
        throw Error{ErrorCode::unavailable, "only " + std::to_string(got.size()) + " of the " +
                                                std::to_string(k) + " needed cold chunks are reachable"};
    return got;
}

std::vector<Bytes> fetch_data_chunks(const ColdStrip& s, dht::Network& net, dht::Traffic kind)
{
    if (s.empty())
        return {};
    return codec::decode(gather(s, net, kind), s.strip);
}

trie::Trie reassemble(const Digest& cold_root, std::span<const Bytes> data_chunks)
{
    if (cold_root == zero_digest)
        return {};
    std::unordered_map<Digest, trie::NodePtr, DigestHash> built;
    std::unordered_map<Digest, Bytes, DigestHash> spine;
    for (const auto& chunk : data_chunks)
        for (auto& e : decode_bin(chunk))
        {
            for (const auto& step : e.path)
                spine.emplace(sha256(step.node), step.node);
            built.emplace(e.root->digest, e.root);
        }
    auto root = resolve(cold_root, built, spine, 0);
    if (root->digest != cold_root)
        throw Error{ErrorCode::integrity, "reassembled cold trie root mismatch"};
    return trie::Trie{root};
}

trie::Trie decode_cold(const ColdStrip& s, dht::Network& net)
{
    const auto data = fetch_data_chunks(s, net);
    return reassemble(s.cold_root, data);
}

LookupResult lookup_cold(const trie::Key& key, const ColdStrip& s, dht::Network& net)
{
    LookupResult out;
    if (s.empty())
        return out;

    // Covering subtrie, or failing that the one sharing the longest prefix.
    const trie::Nibbles* best = nullptr;
    size_t best_lcp = 0;
    bool covered = false;
    for (const auto& [prefix, idx] : s.nibble_index)
    {
        if (is_prefix_of(prefix, key))
        {
            best = &prefix;
            covered = true;
            break;
        }
        const auto lcp = common_prefix(prefix, key);
        if (!best || lcp > best_lcp)
        {
            best = &prefix;
            best_lcp = lcp;
        }
    }
    if (!best)
        throw Error{ErrorCode::integrity, "cold strip has an empty nibble index"};
    const uint32_t idx = s.nibble_index.at(*best);

    Bytes chunk;
    try
    {
        chunk = net.get(s.strip.chunk_hashes[idx], s.placement.holders[idx]).payload;
        out.chunks_fetched = 1;
    }
    catch (const Error& e)
    {
        if (e.code() != ErrorCode::unavailable && e.code() != ErrorCode::corrupt_chunk)
            throw;
        auto got = gather(s, net);
        out.chunks_fetched = static_cast<uint32_t>(got.size());
        out.used_fallback = true;
        chunk = codec::decode(got, s.strip)[idx];
    }

    const auto bin = decode_bin(chunk);
    auto entry = std::find_if(bin.begin(), bin.end(), [&](const auto& e) { return e.prefix == *best; });
    if (entry == bin.end())
        throw Error{ErrorCode::integrity, "chunk does not hold the indexed subtrie"};

    if (covered)
    {
        out.proof.path = entry->path;
        const trie::Node* n = entry->root.get();
        size_t depth = entry->prefix.size();
        while (!n->is_leaf())
        {
            const auto slot = trie::nibble(key, depth);
            if (!n->children[slot])
                break;
            out.proof.path.push_back({n->encoding, slot});
            n = n->children[slot].get();
            ++depth;
        }
        out.proof.terminal = n->encoding;
    }
    else
    {
        // The spine branch at depth best_lcp has no child toward the key.
        out.proof.path.assign(entry->path.begin(), entry->path.begin() + static_cast<std::ptrdiff_t>(best_lcp));
        out.proof.terminal = entry->path[best_lcp].node;
    }

    auto check = trie::verify_proof(s.cold_root, key, out.proof);
    if (check.verdict == trie::ProofVerdict::invalid)
        throw Error{ErrorCode::integrity, "cold lookup proof failed against the cold root"};
    if (check.verdict == trie::ProofVerdict::present)
        out.value = std::move(check.value);
    return out;
}

}  // namespace ecchain::cold
