// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/merkle_trie.hpp>

#include <algorithm>

namespace ecchain::trie
{
namespace
{
constexpr uint8_t leaf_tag = 0x00;
constexpr uint8_t branch_tag = 0x01;

Nibbles key_suffix(const Key& key, size_t depth)
{
    Nibbles out;
    out.reserve(key_nibbles - depth);
    for (size_t i = depth; i < key_nibbles; ++i)
        out.push_back(nibble(key, i));
    return out;
}

bool suffix_matches(const Nibbles& suffix, const Key& key, size_t depth)
{
    if (suffix.size() != key_nibbles - depth)
        return false;
    for (size_t i = 0; i < suffix.size(); ++i)
        if (suffix[i] != nibble(key, depth + i))
            return false;
    return true;
}

NodePtr insert(const NodePtr& n, const Key& key, size_t depth, Bytes value)
{
    if (!n)
        return make_leaf(key_suffix(key, depth), std::move(value));
    if (n->is_leaf())
    {
        if (suffix_matches(n->suffix, key, depth))
        {
            if (n->value == value)
                return n;
            return make_leaf(n->suffix, std::move(value));
        }
        std::array<NodePtr, 16> kids{};
        kids[n->suffix[0]] = make_leaf(Nibbles(n->suffix.begin() + 1, n->suffix.end()), n->value);
        return insert(make_branch(kids), key, depth, std::move(value));
    }
    const auto slot = nibble(key, depth);
    auto child = insert(n->children[slot], key, depth + 1, std::move(value));
    if (child == n->children[slot])
        return n;
    auto kids = n->children;
    kids[slot] = std::move(child);
    return make_branch(kids);
}

NodePtr erase(const NodePtr& n, const Key& key, size_t depth)
{
    if (!n)
        return n;
    if (n->is_leaf())
        return suffix_matches(n->suffix, key, depth) ? nullptr : n;
    const auto slot = nibble(key, depth);
    auto child = erase(n->children[slot], key, depth + 1);
    if (child == n->children[slot])
        return n;
    auto kids = n->children;
    kids[slot] = std::move(child);

    size_t live = 0;
    size_t last = 0;
    for (size_t i = 0; i < 16; ++i)
        if (kids[i])
        {
            ++live;
            last = i;
        }
    if (live == 0)
        return nullptr;
    if (live == 1 && kids[last]->is_leaf())
    {
        Nibbles suffix{static_cast<uint8_t>(last)};
        suffix.insert(suffix.end(), kids[last]->suffix.begin(), kids[last]->suffix.end());
        return make_leaf(std::move(suffix), kids[last]->value);
    }
    return make_branch(kids);
}

NodePtr find_node(const NodePtr& n, const Digest& d)
{
    if (!n)
        return nullptr;
    if (n->digest == d)
        return n;
    if (n->is_leaf())
        return nullptr;
    for (const auto& c : n->children)
        if (auto hit = find_node(c, d))
            return hit;
    return nullptr;
}

void walk(const NodePtr& n, Nibbles& prefix, const std::function<void(const Key&, const Bytes&)>& f)
{
    if (!n)
        return;
    if (n->is_leaf())
    {
        Key key{};
        size_t i = 0;
        auto put_nibble = [&](uint8_t v) {
            if (i % 2 == 0)
                key[i / 2] = static_cast<uint8_t>(v << 4);
            else
                key[i / 2] |= v;
            ++i;
        };
        for (auto v : prefix)
            put_nibble(v);
        for (auto v : n->suffix)
            put_nibble(v);
        f(key, n->value);
        return;
    }
    for (uint8_t s = 0; s < 16; ++s)
    {
        if (!n->children[s])
            continue;
        prefix.push_back(s);
        walk(n->children[s], prefix, f);
        prefix.pop_back();
    }
}

void serialize_preorder(const NodePtr& n, ByteWriter& w)
{
    w.blob32(n->encoding);
    if (!n->is_leaf())
        for (const auto& c : n->children)
            if (c)
                serialize_preorder(c, w);
}

struct ParsedLeaf
{
    Nibbles suffix;
    Bytes value;
};

ParsedLeaf parse_leaf(ByteView encoding)
{
    ByteReader r{encoding};
    if (r.u8() != leaf_tag)
        throw Error{ErrorCode::parse, "not a leaf encoding"};
    const uint8_t count = r.u8();
    if (count > key_nibbles)
        throw Error{ErrorCode::parse, "leaf suffix too long"};
    auto packed = r.raw((count + 1) / 2);
    ParsedLeaf out;
    for (size_t i = 0; i < count; ++i)
        out.suffix.push_back(i % 2 == 0 ? static_cast<uint8_t>(packed[i / 2] >> 4)
                                        : static_cast<uint8_t>(packed[i / 2] & 0x0f));
    auto v = r.blob32();
    out.value.assign(v.begin(), v.end());
    if (r.remaining() != 0)
        throw Error{ErrorCode::parse, "trailing bytes in leaf"};
    return out;
}

NodePtr parse_preorder(ByteReader& r)
{
    const auto enc = r.blob32();
    if (enc.empty())
        throw Error{ErrorCode::parse, "empty node encoding"};
    if (enc[0] == leaf_tag)
    {
        auto leaf = parse_leaf(enc);
        return make_leaf(std::move(leaf.suffix), std::move(leaf.value));
    }
    const auto slots = parse_branch(enc);
    std::array<NodePtr, 16> kids{};
    for (size_t s = 0; s < 16; ++s)
    {
        if (!slots[s])
            continue;
        kids[s] = parse_preorder(r);
        if (kids[s]->digest != *slots[s])
            throw Error{ErrorCode::integrity, "subtrie child digest mismatch"};
    }
    return make_branch(kids);
}

}  // namespace

size_t Node::child_count() const noexcept
{
    return static_cast<size_t>(std::count_if(children.begin(), children.end(),
        [](const NodePtr& c) { return c != nullptr; }));
}

NodePtr make_leaf(Nibbles suffix, Bytes value)
{
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::leaf;
    ByteWriter w;
    w.u8(leaf_tag);
    w.u8(static_cast<uint8_t>(suffix.size()));
    for (size_t i = 0; i < suffix.size(); i += 2)
    {
        const uint8_t hi = suffix[i];
        const uint8_t lo = i + 1 < suffix.size() ? suffix[i + 1] : 0;
        w.u8(static_cast<uint8_t>(hi << 4 | lo));
    }
    w.blob32(value);
    n->suffix = std::move(suffix);
    n->value = std::move(value);
    n->encoding = w.take();
    n->digest = sha256(n->encoding);
    n->subtree_bytes = n->encoding.size();
    n->key_count = 1;
    return n;
}

NodePtr make_branch(const std::array<NodePtr, 16>& children)
{
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::branch;
    n->children = children;
    uint16_t bitmap = 0;
    for (size_t i = 0; i < 16; ++i)
        if (children[i])
            bitmap |= static_cast<uint16_t>(1u << i);
    ByteWriter w;
    w.u8(branch_tag);
    w.u16(bitmap);
    uint64_t below = 0;
    for (const auto& c : children)
        if (c)
        {
            w.digest(c->digest);
            below += c->subtree_bytes;
            n->key_count += c->key_count;
        }
    n->encoding = w.take();
    n->digest = sha256(n->encoding);
    n->subtree_bytes = n->encoding.size() + below;
    return n;
}

std::array<std::optional<Digest>, 16> parse_branch(ByteView encoding)
{
    ByteReader r{encoding};
    if (r.u8() != branch_tag)
        throw Error{ErrorCode::parse, "not a branch encoding"};
    const uint16_t bitmap = r.u16();
    std::array<std::optional<Digest>, 16> out{};
    for (size_t i = 0; i < 16; ++i)
        if (bitmap & (1u << i))
            out[i] = r.digest();
    if (r.remaining() != 0)
        throw Error{ErrorCode::parse, "trailing bytes in branch"};
    return out;
}

NodePtr rebuild_node(ByteView encoding, const std::array<NodePtr, 16>& children)
{
    if (!encoding.empty() && encoding[0] == leaf_tag)
    {
        auto leaf = parse_leaf(encoding);
        return make_leaf(std::move(leaf.suffix), std::move(leaf.value));
    }
    const auto slots = parse_branch(encoding);
    for (size_t s = 0; s < 16; ++s)
    {
        const bool want = slots[s].has_value();
        if (want != (children[s] != nullptr) || (want && children[s]->digest != *slots[s]))
            throw Error{ErrorCode::integrity, "child does not match branch encoding"};
    }
    return make_branch(children);
}

bool verify_path(const Digest& root, const MerklePath& path, const Digest& target)
{
    Digest cur = target;
    try
    {
        for (auto it = path.rbegin(); it != path.rend(); ++it)
        {
            if (it->slot >= 16)
                return false;
            const auto slots = parse_branch(it->node);
            if (!slots[it->slot] || *slots[it->slot] != cur)
                return false;
            cur = sha256(it->node);
        }
    }
    catch (const Error&)
    {
        return false;
    }
    return cur == root;
}

ProofCheck verify_proof(const Digest& root, const Key& key, const Proof& proof)
{
    ProofCheck out;
    if (root == zero_digest)
    {
        if (proof.path.empty() && proof.terminal.empty())
            out.verdict = ProofVerdict::absent;
        return out;
    }
    if (proof.terminal.empty() || proof.path.size() >= key_nibbles)
        return out;
    for (size_t i = 0; i < proof.path.size(); ++i)
        if (proof.path[i].slot != nibble(key, i))
            return out;
    if (!verify_path(root, proof.path, sha256(proof.terminal)))
        return out;

    const size_t depth = proof.path.size();
    try
    {
        if (proof.terminal[0] == leaf_tag)
        {
            auto leaf = parse_leaf(proof.terminal);
            if (leaf.suffix.size() != key_nibbles - depth)
                return out;
            if (suffix_matches(leaf.suffix, key, depth))
            {
                out.verdict = ProofVerdict::present;
                out.value = std::move(leaf.value);
            }
            else
                out.verdict = ProofVerdict::absent;
            return out;
        }
        const auto slots = parse_branch(proof.terminal);
        if (!slots[nibble(key, depth)])
            out.verdict = ProofVerdict::absent;
    }
    catch (const Error&)
    {
        out.verdict = ProofVerdict::invalid;
    }
    return out;
}

Subtrie serialize_subtrie(const NodePtr& root)
{
    Subtrie out;
    if (!root)
        return out;
    ByteWriter w;
    serialize_preorder(root, w);
    out.root = root->digest;
    out.nodes = w.take();
    out.size_bytes = root->subtree_bytes;
    return out;
}

NodePtr parse_subtrie(ByteView nodes)
{
    if (nodes.empty())
        return nullptr;
    ByteReader r{nodes};
    auto root = parse_preorder(r);
    if (r.remaining() != 0)
        throw Error{ErrorCode::parse, "trailing bytes after subtrie"};
    return root;
}

Digest Trie::put(const Key& key, Bytes value)
{
    root_ = insert(root_, key, 0, std::move(value));
    return root_digest();
}

std::optional<Bytes> Trie::get(const Key& key) const
{
    const Node* n = root_.get();
    size_t depth = 0;
    while (n)
    {
        if (n->is_leaf())
        {
            if (suffix_matches(n->suffix, key, depth))
                return n->value;
            return std::nullopt;
        }
        n = n->children[nibble(key, depth)].get();
        ++depth;
    }
    return std::nullopt;
}

Digest Trie::remove(const Key& key)
{
    root_ = erase(root_, key, 0);
    return root_digest();
}

Proof Trie::prove(const Key& key) const
{
    Proof proof;
    const Node* n = root_.get();
    size_t depth = 0;
    while (n)
    {
        if (n->is_leaf())
            break;
        const auto slot = nibble(key, depth);
        if (!n->children[slot])
            break;
        proof.path.push_back({n->encoding, slot});
        n = n->children[slot].get();
        ++depth;
    }
    if (n)
        proof.terminal = n->encoding;
    return proof;
}

NodePtr Trie::descend(const Nibbles& prefix) const
{
    NodePtr n = root_;
    for (auto s : prefix)
    {
        if (!n || n->is_leaf())
            return nullptr;
        n = n->children[s];
    }
    return n;
}

MerklePath Trie::path_to(const Nibbles& prefix) const
{
    MerklePath path;
    const Node* n = root_.get();
    for (auto s : prefix)
    {
        if (!n || n->is_leaf() || !n->children[s])
            throw Error{ErrorCode::missing_node, "prefix does not resolve in trie"};
        path.push_back({n->encoding, s});
        n = n->children[s].get();
    }
    return path;
}

NodePtr Trie::find(const Digest& digest) const
{
    auto n = find_node(root_, digest);
    if (!n)
        throw Error{ErrorCode::missing_node, "unknown node digest " + to_hex(digest)};
    return n;
}

std::vector<ChildInfo> Trie::enumerate_children(const Digest& digest) const
{
    const auto n = find(digest);
    std::vector<ChildInfo> out;
    if (n->is_leaf())
        return out;
    for (uint8_t s = 0; s < 16; ++s)
        if (const auto& c = n->children[s])
            out.push_back({s, c->digest, c->subtree_bytes});
    return out;
}

void Trie::for_each(const std::function<void(const Key&, const Bytes&)>& f) const
{
    Nibbles prefix;
    walk(root_, prefix, f);
}

}  // namespace ecchain::trie
