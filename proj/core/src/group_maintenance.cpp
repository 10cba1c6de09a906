// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/group_maintenance.hpp>

#include <algorithm>

namespace ecchain::groups
{
namespace
{
bool contains(std::span<const dht::NodeId> v, const dht::NodeId& n)
{
    return std::find(v.begin(), v.end(), n) != v.end();
}

Digest stand_in(uint64_t tag, uint64_t a, uint64_t b, uint32_t i)
{
    ByteWriter w;
    w.u64(tag);
    w.u64(a);
    w.u64(b);
    w.u32(i);
    return sha256(w.bytes());
}

Digest strip_id_of(const std::vector<Digest>& hashes)
{
    ByteWriter w;
    for (const auto& h : hashes)
        w.digest(h);
    return sha256(w.bytes());
}

/// Parses every segment of decoded ledger data and checks it against the chain.
void check_ledger_data(const ledger::LedgerStrip& s, std::span<const Bytes> data, const ledger::Chain& chain)
{
    for (const auto& seg : s.segments)
    {
        const auto blocks =
            ledger::parse_batch(codec::join_and_unpad(data.subspan(seg.first_chunk, seg.chunk_count)));
        if (blocks.size() != seg.range.size())
            throw Error{ErrorCode::integrity, "decoded segment has the wrong block count"};
        for (const auto& b : blocks)
            if (b.block_hash != chain.at(b.height).block_hash)
                throw Error{ErrorCode::integrity, "decoded block " + std::to_string(b.height) + " differs"};
    }
}

// Data chunks of a strip rebuilt from a full copy of the chain.
std::vector<Bytes> local_data(const ledger::LedgerStrip& s, const ledger::Chain& chain)
{
    std::vector<Bytes> out(s.strip.params.k);
    for (const auto& seg : s.segments)
    {
        auto parts = codec::pad_and_split(ledger::batch_blob(chain, seg.range), seg.chunk_count);
        for (uint32_t i = 0; i < seg.chunk_count; ++i)
            out[seg.first_chunk + i] = std::move(parts[i]);
    }
    for (uint32_t i = 0; i < out.size(); ++i)
        if (sha256(out[i]) != s.strip.chunk_hashes[i])
            throw Error{ErrorCode::integrity, "local copy of chunk " + std::to_string(i) + " differs from the strip"};
    return out;
}

/// Heights (from, upto] cut on the k grid; the last piece may be short.
std::vector<ledger::HeightRange> grid_ranges(uint64_t from, uint64_t upto, uint32_t k)
{
    std::vector<ledger::HeightRange> out;
    uint64_t next = from + 1;
    while (next <= upto)
    {
        const uint64_t cell_end = ((next - 1) / k + 1) * k;
        out.push_back({next, std::min(cell_end, upto)});
        next = out.back().last + 1;
    }
    return out;
}

bool same_structure(const std::vector<cold::Bin>& a, const std::vector<cold::Bin>& b)
{
    if (a.size() != b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i)
    {
        if (a[i].size() != b[i].size())
            return false;
        for (size_t j = 0; j < a[i].size(); ++j)
            if (a[i][j].prefix != b[i][j].prefix)
                return false;
    }
    return true;
}

/// Moves chunk slots off departed holders onto the least-loaded live
/// member. Returns the moved indices.
std::vector<bool> reassign_departed(std::vector<dht::NodeId>& holders, std::span<const dht::NodeId> live)
{
    std::vector<bool> moved(holders.size(), false);
    std::map<dht::NodeId, uint32_t> load;
    for (const auto& m : live)
        load[m] = 0;
    for (const auto& h : holders)
        if (auto it = load.find(h); it != load.end())
            ++it->second;
    for (size_t i = 0; i < holders.size(); ++i)
    {
        if (load.contains(holders[i]))
            continue;
        auto best = std::min_element(load.begin(), load.end(),
            [](const auto& x, const auto& y) { return x.second < y.second; });
        holders[i] = best->first;
        ++best->second;
        moved[i] = true;
    }
    return moved;
}
}  // namespace

Cluster::Cluster(const ledger::Chain& chain, ClusterConfig config) : chain_{&chain}, cfg_{std::move(config)} {}

std::optional<Cluster::Located> Cluster::locate(const dht::NodeId& node) const
{
    if (contains(staging_, node))
        return Located{true, 0};
    for (size_t i = 0; i < groups_.size(); ++i)
        if (std::binary_search(groups_[i].members.begin(), groups_[i].members.end(), node))
            return Located{false, i};
    return std::nullopt;
}

const Group& Cluster::group(uint64_t id) const
{
    for (const auto& g : groups_)
        if (g.id == id)
            return g;
    throw Error{ErrorCode::parameter, "no group " + std::to_string(id)};
}

size_t Cluster::node_count() const noexcept
{
    size_t n = staging_.size();
    for (const auto& g : groups_)
        n += g.members.size();
    return n;
}

std::vector<uint32_t> Cluster::census() const
{
    std::vector<uint32_t> out;
    for (const auto& g : groups_)
        out.push_back(g.nominal);
    std::sort(out.rbegin(), out.rend());
    return out;
}

void Cluster::admit(const dht::NodeId& node)
{
    if (net_.has_node(node))
        throw Error{ErrorCode::parameter, "node " + to_hex(node.id).substr(0, 12) + " is already present"};
    net_.add_node(node);
    staging_.push_back(node);
    replicas_.insert(node);
    net_.charge(dht::Traffic::join, replica());
    form_from_staging();
    try_merge();
}

void Cluster::leave(const dht::NodeId& node)
{
    const auto at = locate(node);
    if (!at)
        throw Error{ErrorCode::parameter, "node " + to_hex(node.id).substr(0, 12) + " is not in the network"};
    net_.remove_node(node);
    replicas_.erase(node);
    if (at->staged)
    {
        staging_.erase(std::find(staging_.begin(), staging_.end(), node));
        return;
    }
    auto& g = groups_[at->group];
    g.members.erase(std::lower_bound(g.members.begin(), g.members.end(), node));
    if (g.departed() * 4 >= g.nominal)
    {
        downgrade(at->group);
        form_from_staging();
        try_merge();
    }
}

void Cluster::settle()
{
    replicas_ = {staging_.begin(), staging_.end()};
}

void Cluster::set_online(const dht::NodeId& node, bool online)
{
    if (!locate(node))
        throw Error{ErrorCode::parameter, "node " + to_hex(node.id).substr(0, 12) + " is not in the network"};
    net_.set_online(node, online);
}

void Cluster::encode_group(Group& g, const ledger::HeightRange& r)
{
    g.strips.push_back(ledger::encode_range(*chain_, r, g.k(), g.members, real() ? &net_ : nullptr, g.id));
    g.encoded_upto = r.last;
}

void Cluster::encode_pending()
{
    for (auto& g : groups_)
        for (const auto& r : ledger::select_encoding_range(chain_->tip(), g.encoded_upto, {cfg_.distance_D, g.k()}))
            encode_group(g, r);
}

void Cluster::catch_up(Group& g, uint64_t upto)
{
    for (const auto& r : grid_ranges(g.encoded_upto, upto, g.k()))
        encode_group(g, r);
}

void Cluster::form_from_staging()
{
    while (staging_.size() >= 4)
    {
        Group g;
        g.id = next_id_++;
        g.nominal = 4;
        g.formed_seq = ++seq_;
        g.members.assign(staging_.begin(), staging_.begin() + 4);
        std::sort(g.members.begin(), g.members.end());
        staging_.erase(staging_.begin(), staging_.begin() + 4);
        const auto ranges = ledger::select_encoding_range(chain_->tip(), 0, {cfg_.distance_D, g.k()});
        catch_up(g, ranges.empty() ? 0 : ranges.back().last);
        encode_cold_local(g);
        events_.push_back({EventKind::form, g.id, {}, g.nominal});
        groups_.push_back(std::move(g));
    }
}

cold::ColdEncoding Cluster::cold_encoding(const Digest& root, const std::vector<cold::Bin>& bins,
    uint64_t tag) const
{
    if (real())
        return cold::encode_bins(root, bins);
    cold::ColdEncoding out;
    out.meta.cold_root = root;
    if (root == zero_digest)
        return out;
    const auto k = static_cast<uint32_t>(bins.size());
    uint64_t len = 0;
    for (const auto& b : bins)
        len = std::max<uint64_t>(len, cold::encode_bin(b).size());
    auto& s = out.meta.strip;
    s.params = {k, k};
    s.coding_length = len;
    s.data_lengths.assign(k, len);
    uint64_t salt = 0;
    for (size_t i = 0; i < 8; ++i)
        salt = (salt << 8) | root[i];
    for (uint32_t i = 0; i < 2 * k; ++i)
        s.chunk_hashes.push_back(stand_in(tag, salt, k, i));
    s.strip_id = strip_id_of(s.chunk_hashes);
    out.meta.nibble_index = cold::index_bins(bins);
    return out;
}

void Cluster::place_cold(Group& g, cold::ColdEncoding enc, std::vector<cold::Bin> bins,
    const std::optional<dht::NodeId>& source, dht::Traffic kind)
{
    g.cold_bins = std::move(bins);
    g.cold = std::move(enc.meta);
    if (g.cold.empty())
        return;
    g.cold.placement = g.members.size() == 2 * size_t{g.k()} ? dht::assign_strip(g.cold.strip, g.members)
                                                            : dht::assign_strip_capped(g.cold.strip, g.members);
    for (uint32_t i = 0; i < g.cold.strip.params.total(); ++i)
    {
        const auto& to = g.cold.placement.holders[i];
        if (source && *source != to)
            net_.charge(kind, g.cold.strip.stored_bytes(i));
        if (real())
            net_.store(to, enc.chunks[i]);
    }
}

void Cluster::encode_cold_local(Group& g)
{
    if (!base_ || base_->empty())
    {
        g.cold = {};
        g.cold_bins.clear();
        return;
    }
    auto split = cold::split_trie(*base_, g.k());
    auto enc = cold_encoding(base_->root_digest(), split.bins, g.id);
    place_cold(g, std::move(enc), std::move(split.bins), std::nullopt, dht::Traffic::fetch);
}

std::vector<codec::Chunk> Cluster::collect(const codec::Strip& strip, std::span<const dht::NodeId> holders,
    const dht::NodeId& reader, dht::Traffic kind)
{
    const auto k = strip.params.k;
    std::vector<codec::Chunk> got;
    for (uint32_t i = 0; i < strip.params.total() && got.size() < k; ++i)
    {
        const auto& h = holders[i];
        if (!reachable(h))
            continue;
        if (!real())
        {
            if (h != reader)
            {
                net_.charge(kind, strip.stored_bytes(i), 2);
                ++fetch_count_;
            }
            codec::Chunk c;
            c.strip_id = strip.strip_id;
            c.index = i;
            c.content_hash = strip.chunk_hashes[i];
            got.push_back(std::move(c));
            continue;
        }
        try
        {
            if (h == reader)
                got.push_back(net_.local(strip.chunk_hashes[i], h));
            else
            {
                got.push_back(net_.get(strip.chunk_hashes[i], h, kind));
                ++fetch_count_;
            }
            got.back().index = i;
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::unavailable && e.code() != ErrorCode::corrupt_chunk)
                throw;
        }
    }
    if (got.size() < k)
        throw Error{ErrorCode::unavailable, "strip " + to_hex(strip.strip_id).substr(0, 12) + ": only " +
                                                std::to_string(got.size()) + " of " + std::to_string(k) +
                                                " chunks reachable"};
    return got;
}

void Cluster::push(const codec::Chunk& chunk, uint64_t bytes, const dht::NodeId& from, const dht::NodeId& to,
    dht::Traffic kind)
{
    if (from != to)
        net_.charge(kind, bytes);
    if (real())
        net_.store(to, chunk);
}

void Cluster::release_strip(const codec::Strip& strip, std::span<const dht::NodeId> holders)
{
    if (!real())
        return;
    for (size_t i = 0; i < holders.size(); ++i)
        net_.drop(holders[i], strip.chunk_hashes[i]);
}

dht::NodeId Cluster::regenerator(std::span<const dht::NodeId> preferred, std::span<const dht::NodeId> members) const
{
    for (const auto& n : preferred)
        if (contains(members, n) && reachable(n))
            return n;
    for (const auto& n : members)
        if (reachable(n))
            return n;
    throw Error{ErrorCode::unavailable, "no reachable member to regenerate chunks"};
}

std::optional<dht::NodeId> Cluster::replica_holder(std::span<const dht::NodeId> members,
    std::span<const dht::NodeId> preferred) const
{
    for (const auto& n : preferred)
        if (contains(members, n) && replicas_.contains(n) && reachable(n))
            return n;
    for (const auto& n : members)
        if (replicas_.contains(n) && reachable(n))
            return n;
    return std::nullopt;
}

void Cluster::refresh_cold()
{
    for (auto& g : groups_)
    {
        const auto old = g.cold;
        const auto reader = regenerator({}, g.members);
        if (!old.empty())
            collect(old.strip, old.placement.holders, reader, dht::Traffic::fetch);
        if (!base_ || base_->empty())
        {
            g.cold = {};
            g.cold_bins.clear();
        }
        else
        {
            auto split = cold::split_trie(*base_, g.k());
            auto enc = cold_encoding(base_->root_digest(), split.bins, g.id);
            place_cold(g, std::move(enc), std::move(split.bins), reader, dht::Traffic::fetch);
        }
        if (!old.empty())
            release_strip(old.strip, old.placement.holders);
    }
}

void Cluster::try_merge()
{
    while (true)
    {
        std::map<uint32_t, std::vector<size_t>> by_size;
        for (size_t i = 0; i < groups_.size(); ++i)
            by_size[groups_[i].nominal].push_back(i);
        auto dup = std::find_if(by_size.begin(), by_size.end(), [](const auto& e) { return e.second.size() >= 2; });
        if (dup == by_size.end())
            return;
        auto idx = dup->second;
        std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return groups_[a].formed_seq < groups_[b].formed_seq; });
        Group g1 = std::move(groups_[idx[0]]);
        Group g2 = std::move(groups_[idx[1]]);
        groups_.erase(groups_.begin() + static_cast<std::ptrdiff_t>(std::max(idx[0], idx[1])));
        groups_.erase(groups_.begin() + static_cast<std::ptrdiff_t>(std::min(idx[0], idx[1])));
        groups_.push_back(merge(std::move(g1), std::move(g2)));
    }
}

Group Cluster::merge(Group g1, Group g2)
{
    const auto H = std::max(g1.encoded_upto, g2.encoded_upto);
    catch_up(g1, H);
    catch_up(g2, H);

    Group out;
    out.id = next_id_++;
    out.nominal = 2 * g1.nominal;
    out.formed_seq = ++seq_;
    out.encoded_upto = H;
    out.members = g1.members;
    out.members.insert(out.members.end(), g2.members.begin(), g2.members.end());
    std::sort(out.members.begin(), out.members.end());

    if (replica_holder(out.members))
        ++stats_.local_regenerations;
    merge_ledger(g1, g2, out);
    merge_cold(g1, g2, out);
    release_strip(g1.cold.strip, g1.cold.placement.holders);
    release_strip(g2.cold.strip, g2.cold.placement.holders);

    ++stats_.merges;
    events_.push_back({EventKind::merge, out.id, {g1.id, g2.id}, out.nominal});
    return out;
}

void Cluster::merge_ledger(const Group& g1, const Group& g2, Group& out)
{
    const uint32_t k1 = g1.k();
    const uint32_t K = out.k();
    const uint64_t H = out.encoded_upto;
    const uint64_t full = H / K * K;
    const auto find = [k1](const Group& g, const ledger::HeightRange& r) -> const ledger::LedgerStrip* {
        for (const auto& s : g.strips)
            if (s.range == r && s.strip.params.k == k1)
                return &s;
        return nullptr;
    };

    // Rebuilds a cell from g1's strips on the merged group.
    const auto reencode = [&](const ledger::HeightRange& cell) {
        const auto local = replica_holder(out.members);
        const auto reader = local ? *local : regenerator({}, out.members);
        for (const auto& s : g1.strips)
        {
            if (local || s.range.first < cell.first || s.range.last > cell.last)
                continue;
            auto got = collect(s.strip, s.holders, reader, dht::Traffic::upgrade);
            if (real())
                check_ledger_data(s, codec::decode(got, s.strip), *chain_);
        }
        auto ns = ledger::encode_range(*chain_, cell, K, out.members, real() ? &net_ : nullptr, out.id);
        for (uint32_t i = 0; i < ns.strip.params.total(); ++i)
            if (ns.holders[i] != reader)
            {
                net_.charge(dht::Traffic::upgrade, ns.chunk_bytes(i));
                if (i < K)
                    stats_.data_holder_push_bytes += ns.chunk_bytes(i);
            }
        out.strips.push_back(std::move(ns));
        ++stats_.reencoded_cells;
    };

    for (uint64_t first = 1; first + K - 1 <= H; first += K)
    {
        const ledger::HeightRange cell{first, first + K - 1};
        const auto* s1 = find(g1, {first, first + k1 - 1});
        const auto* s2 = find(g2, {first + k1, cell.last});
        if (!s1 || !s2)
        {
            reencode(cell);
            continue;
        }

        std::vector<dht::NodeId> holders(s1->holders.begin(), s1->holders.begin() + k1);
        holders.insert(holders.end(), s2->holders.begin(), s2->holders.begin() + k1);
        holders.insert(holders.end(), s1->holders.begin() + k1, s1->holders.end());
        holders.insert(holders.end(), s2->holders.begin() + k1, s2->holders.end());
        const auto local = replica_holder(out.members, std::span{holders}.subspan(K));
        const auto reader = local ? *local : regenerator(std::span{holders}.subspan(K), out.members);

        std::vector<codec::Chunk> c1, c2;
        if (!local)
        {
            fetch_count_ = 0;
            c1 = collect(s1->strip, s1->holders, reader, dht::Traffic::upgrade);
            c2 = collect(s2->strip, s2->holders, reader, dht::Traffic::upgrade);
            stats_.regenerator_fetches += fetch_count_;
        }

        ledger::LedgerStrip ns;
        ns.range = cell;
        ns.segments = s1->segments;
        for (auto seg : s2->segments)
        {
            seg.first_chunk += k1;
            ns.segments.push_back(seg);
        }
        std::vector<codec::Chunk> chunks;
        if (real())
        {
            auto d1 = local ? local_data(*s1, *chain_) : codec::decode(c1, s1->strip);
            auto d2 = local ? local_data(*s2, *chain_) : codec::decode(c2, s2->strip);
            check_ledger_data(*s1, d1, *chain_);
            check_ledger_data(*s2, d2, *chain_);
            d1.insert(d1.end(), std::make_move_iterator(d2.begin()), std::make_move_iterator(d2.end()));
            auto enc = codec::encode_ragged(d1, {K, K});
            ns.strip = std::move(enc.strip);
            chunks = std::move(enc.chunks);
        }
        else
        {
            auto& st = ns.strip;
            st.params = {K, K};
            st.coding_length = std::max(s1->strip.coding_length, s2->strip.coding_length);
            st.data_lengths = s1->strip.data_lengths;
            st.data_lengths.insert(st.data_lengths.end(), s2->strip.data_lengths.begin(), s2->strip.data_lengths.end());
            st.chunk_hashes.assign(s1->strip.chunk_hashes.begin(), s1->strip.chunk_hashes.begin() + k1);
            st.chunk_hashes.insert(st.chunk_hashes.end(), s2->strip.chunk_hashes.begin(),
                s2->strip.chunk_hashes.begin() + k1);
            for (uint32_t i = 0; i < K; ++i)
                st.chunk_hashes.push_back(stand_in(out.id, cell.first, cell.last, K + i));
            st.strip_id = strip_id_of(st.chunk_hashes);
            chunks.resize(2 * K);
        }

        const auto moved = reassign_departed(holders, out.members);
        for (uint32_t i = 0; i < 2 * K; ++i)
        {
            const auto bytes = ns.strip.stored_bytes(i);
            if (i < K && !moved[i])
            {
                if (real())
                    net_.store(holders[i], chunks[i]);
                continue;
            }
            push(chunks[i], bytes, reader, holders[i], dht::Traffic::upgrade);
            if (i < K)
                stats_.data_holder_push_bytes += bytes;
        }
        ns.holders = std::move(holders);
        out.strips.push_back(std::move(ns));
        ++stats_.regular_cells;
    }

    // The short last piece would otherwise stay on a few of g1's members.
    if (H > full)
        reencode({full + 1, H});
    for (const auto& s : g1.strips)
        release_strip(s.strip, s.holders);
    for (const auto& s : g2.strips)
        release_strip(s.strip, s.holders);
}

void Cluster::merge_cold(const Group& g1, const Group& g2, Group& out)
{
    if (g1.cold.empty() && g2.cold.empty())
        return;
    if (g1.cold.cold_root != g2.cold.cold_root)
        throw Error{ErrorCode::divergence, "groups " + std::to_string(g1.id) + " and " + std::to_string(g2.id) +
                                               " hold different cold roots"};
    const uint32_t k1 = g1.k();
    const uint32_t K = out.k();
    const auto& h1 = g1.cold.placement.holders;
    const auto& h2 = g2.cold.placement.holders;

    std::vector<dht::NodeId> parity(h1.begin() + k1, h1.end());
    parity.insert(parity.end(), h2.begin() + k1, h2.end());
    const auto local = replica_holder(out.members, parity);
    const auto reader = local ? *local : regenerator(parity, out.members);

    // A replica holder re-derives the bins from its own state copy.
    auto bins = g1.cold_bins;
    if (!local)
    {
        fetch_count_ = 0;
        auto got = collect(g1.cold.strip, h1, reader, dht::Traffic::upgrade);
        stats_.regenerator_fetches += fetch_count_;
        if (real())
        {
            bins.clear();
            for (const auto& d : codec::decode(got, g1.cold.strip))
                bins.push_back(cold::decode_bin(d));
        }
    }
    auto new_bins = cold::rebin(std::move(bins), K);
    auto enc = cold_encoding(g1.cold.cold_root, new_bins, out.id);

    if (!same_structure(g1.cold_bins, g2.cold_bins))
    {
        place_cold(out, std::move(enc), std::move(new_bins), reader, dht::Traffic::upgrade);
        for (uint32_t i = 0; i < K; ++i)
            if (out.cold.placement.holders[i] != reader)
                stats_.data_holder_push_bytes += out.cold.strip.stored_bytes(i);
        return;
    }

    std::vector<dht::NodeId> holders(2 * K);
    for (uint32_t i = 0; i < k1; ++i)
    {
        holders[2 * i] = h1[i];
        holders[2 * i + 1] = h2[i];
    }
    std::copy(parity.begin(), parity.end(), holders.begin() + K);
    const auto moved = reassign_departed(holders, out.members);
    for (uint32_t i = 0; i < 2 * K; ++i)
    {
        const auto bytes = enc.meta.strip.stored_bytes(i);
        const codec::Chunk none;
        const auto& chunk = real() ? enc.chunks[i] : none;
        if (i < K && !moved[i])
        {
            if (real())
                net_.store(holders[i], chunk);
            continue;
        }
        push(chunk, bytes, reader, holders[i], dht::Traffic::upgrade);
        if (i < K)
            stats_.data_holder_push_bytes += bytes;
    }
    out.cold = std::move(enc.meta);
    out.cold.placement = {out.cold.strip.strip_id, std::move(holders)};
    out.cold_bins = std::move(new_bins);
}

Group Cluster::rebuild(const Group& old, std::vector<dht::NodeId> members, uint32_t nominal,
    const dht::NodeId& reader, std::vector<cold::Bin> bins)
{
    Group ng;
    ng.id = next_id_++;
    ng.nominal = nominal;
    ng.formed_seq = ++seq_;
    ng.members = std::move(members);
    std::sort(ng.members.begin(), ng.members.end());
    ng.encoded_upto = old.encoded_upto;

    for (const auto& r : grid_ranges(0, old.encoded_upto, ng.k()))
    {
        auto ls = ledger::encode_range(*chain_, r, ng.k(), ng.members, real() ? &net_ : nullptr, ng.id);
        for (uint32_t i = 0; i < ls.strip.params.total(); ++i)
            if (ls.holders[i] != reader)
                net_.charge(dht::Traffic::downgrade, ls.chunk_bytes(i));
        ng.strips.push_back(std::move(ls));
    }

    if (!old.cold.empty())
    {
        auto new_bins = cold::rebin(std::move(bins), ng.k());
        auto enc = cold_encoding(old.cold.cold_root, new_bins, ng.id);
        place_cold(ng, std::move(enc), std::move(new_bins), reader, dht::Traffic::downgrade);
    }
    return ng;
}

void Cluster::downgrade(size_t index)
{
    Group old = std::move(groups_[index]);
    groups_.erase(groups_.begin() + static_cast<std::ptrdiff_t>(index));
    ++stats_.downgrades;

    const auto& s = old.members;
    const size_t q = std::min<size_t>(old.nominal / 4, s.size());
    const size_t h = std::min<size_t>(old.nominal / 2, s.size() - q);
    const std::vector<dht::NodeId> small(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(q));
    const std::vector<dht::NodeId> half(s.begin() + static_cast<std::ptrdiff_t>(q),
        s.begin() + static_cast<std::ptrdiff_t>(q + h));
    std::vector<dht::NodeId> staged(s.begin() + static_cast<std::ptrdiff_t>(q + h), s.end());

    std::vector<std::pair<const std::vector<dht::NodeId>*, uint32_t>> parts;
    for (const auto& [part, nominal] : {std::pair{&half, old.nominal / 2}, std::pair{&small, old.nominal / 4}})
    {
        if (nominal >= 4 && part->size() == nominal)
            parts.emplace_back(part, nominal);
        else
            staged.insert(staged.end(), part->begin(), part->end());
    }

    // One survivor recovers the data and re-encodes it for every new group.
    std::vector<Group> made;
    if (!parts.empty())
    {
        const auto local = replica_holder(s);
        const auto reader = local ? *local : regenerator({}, s);
        auto bins = old.cold_bins;
        if (!local)
        {
            for (const auto& st : old.strips)
            {
                auto got = collect(st.strip, st.holders, reader, dht::Traffic::downgrade);
                if (real())
                    check_ledger_data(st, codec::decode(got, st.strip), *chain_);
            }
            if (!old.cold.empty())
            {
                auto got = collect(old.cold.strip, old.cold.placement.holders, reader, dht::Traffic::downgrade);
                if (real())
                {
                    bins.clear();
                    for (const auto& d : codec::decode(got, old.cold.strip))
                        bins.push_back(cold::decode_bin(d));
                }
            }
        }
        for (const auto& [part, nominal] : parts)
            made.push_back(rebuild(old, *part, nominal, reader, bins));
    }

    for (const auto& st : old.strips)
        release_strip(st.strip, st.holders);
    release_strip(old.cold.strip, old.cold.placement.holders);

    for (const auto& n : staged)
    {
        staging_.push_back(n);
        replicas_.insert(n);
        net_.charge(dht::Traffic::downgrade, replica());
    }
    if (!staged.empty())
        events_.push_back({EventKind::to_staging, 0, {old.id}, static_cast<uint32_t>(staged.size())});
    for (auto& g : made)
    {
        events_.push_back({EventKind::downgrade, g.id, {old.id}, g.nominal});
        groups_.push_back(std::move(g));
    }
}

namespace
{
struct LedgerGuard
{
    dht::Network& net;
    dht::BandwidthLedger saved = net.ledger();
    ~LedgerGuard() { net.set_ledger(saved); }
};
}  // namespace

std::optional<ledger::Block> Cluster::recover_block(uint64_t group_id, uint64_t height)
{
    const auto& g = group(group_id);
    if (height > g.encoded_upto)
    {
        const auto& b = chain_->at(height);
        return real() ? std::optional{b} : std::nullopt;
    }
    const auto s = std::find_if(g.strips.begin(), g.strips.end(),
        [&](const ledger::LedgerStrip& x) { return x.range.contains(height); });
    if (s == g.strips.end())
        throw Error{ErrorCode::missing_data, "group " + std::to_string(group_id) + " has no strip for height " +
                                                 std::to_string(height)};
    LedgerGuard guard{net_};
    if (real())
        return ledger::recover_from_strip(*s, height, chain_->at(height).block_hash, net_);
    uint32_t live = 0;
    for (const auto& h : s->holders)
        live += reachable(h) ? 1 : 0;
    if (live < s->strip.params.k)
        throw Error{ErrorCode::unavailable, "block " + std::to_string(height) + ": only " + std::to_string(live) +
                                                " chunks reachable"};
    return std::nullopt;
}

std::optional<cold::LookupResult> Cluster::lookup_cold(uint64_t group_id, const trie::Key& key)
{
    const auto& g = group(group_id);
    if (g.cold.empty())
        return real() ? std::optional{cold::LookupResult{}} : std::nullopt;
    LedgerGuard guard{net_};
    if (real())
        return cold::lookup_cold(key, g.cold, net_);
    const auto& holders = g.cold.placement.holders;
    for (const auto& [prefix, idx] : g.cold.nibble_index)
    {
        bool covers = true;
        for (size_t i = 0; i < prefix.size() && covers; ++i)
            covers = prefix[i] == trie::nibble(key, i);
        if (covers && reachable(holders[idx]))
            return std::nullopt;
    }
    uint32_t live = 0;
    for (const auto& h : holders)
        live += reachable(h) ? 1 : 0;
    if (live < g.cold.strip.params.k)
        throw Error{ErrorCode::unavailable, "cold lookup: only " + std::to_string(live) + " chunks reachable"};
    return std::nullopt;
}

std::map<dht::NodeId, uint64_t> Cluster::encoded_bytes_by_node() const
{
    std::map<dht::NodeId, uint64_t> out;
    for (const auto& g : groups_)
    {
        for (const auto& m : g.members)
            out[m];
        const auto add = [&](const dht::NodeId& h, uint64_t bytes) {
            if (std::binary_search(g.members.begin(), g.members.end(), h))
                out[h] += bytes;
        };
        for (const auto& s : g.strips)
            for (uint32_t i = 0; i < s.strip.params.total(); ++i)
                add(s.holders[i], s.chunk_bytes(i));
        if (!g.cold.empty())
            for (uint32_t i = 0; i < g.cold.strip.params.total(); ++i)
                add(g.cold.placement.holders[i], g.cold.strip.stored_bytes(i));
    }
    return out;
}

uint64_t Cluster::encoded_bytes_total() const
{
    uint64_t t = 0;
    for (const auto& [n, b] : encoded_bytes_by_node())
        t += b;
    return t;
}

}  // namespace ecchain::groups
