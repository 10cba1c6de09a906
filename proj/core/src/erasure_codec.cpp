// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/erasure_codec.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <string>

namespace ecchain::codec
{
namespace
{
// Primitive polynomial x^8 + x^4 + x^3 + x^2 + 1.
constexpr unsigned field_poly = 0x11d;

struct Tables
{
    std::array<uint8_t, 512> exp{};
    std::array<int, 256> log{};
    std::array<std::array<uint8_t, 256>, 256> mul{};

    Tables()
    {
        unsigned x = 1;
        for (int i = 0; i < 255; ++i)
        {
            exp[i] = static_cast<uint8_t>(x);
            log[x] = i;
            x <<= 1;
            if (x & 0x100)
                x ^= field_poly;
        }
        for (int i = 255; i < 512; ++i)
            exp[i] = exp[i - 255];
        for (int a = 1; a < 256; ++a)
            for (int b = 1; b < 256; ++b)
                mul[a][b] = exp[log[a] + log[b]];
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

// dst ^= c * src over the first n bytes of src; dst is at least as long.
void mul_add(uint8_t c, ByteView src, uint8_t* dst)
{
    if (c == 0)
        return;
    if (c == 1)
    {
        for (size_t i = 0; i < src.size(); ++i)
            dst[i] ^= src[i];
        return;
    }
    const auto& row = tables().mul[c];
    for (size_t i = 0; i < src.size(); ++i)
        dst[i] ^= row[src[i]];
}

uint8_t cauchy(uint32_t parity_row, uint32_t data_col, uint32_t k)
{
    return gf::inv(static_cast<uint8_t>((k + parity_row) ^ data_col));
}

// Row of the generator matrix for the chunk at `index`.
std::vector<uint8_t> generator_row(uint32_t index, const CodecParams& p)
{
    std::vector<uint8_t> row(p.k, 0);
    if (index < p.k)
        row[index] = 1;
    else
        for (uint32_t j = 0; j < p.k; ++j)
            row[j] = cauchy(index - p.k, j, p.k);
    return row;
}

// Gauss-Jordan inversion of a k x k matrix, row-major.
std::vector<uint8_t> invert(std::vector<uint8_t> a, uint32_t n)
{
    std::vector<uint8_t> inv(size_t{n} * n, 0);
    for (uint32_t i = 0; i < n; ++i)
        inv[size_t{i} * n + i] = 1;
    for (uint32_t col = 0; col < n; ++col)
    {
        uint32_t pivot = col;
        while (pivot < n && a[size_t{pivot} * n + col] == 0)
            ++pivot;
        if (pivot == n)
            throw Error{ErrorCode::integrity, "singular decode matrix"};
        if (pivot != col)
            for (uint32_t j = 0; j < n; ++j)
            {
                std::swap(a[size_t{pivot} * n + j], a[size_t{col} * n + j]);
                std::swap(inv[size_t{pivot} * n + j], inv[size_t{col} * n + j]);
            }
        const uint8_t scale = gf::inv(a[size_t{col} * n + col]);
        for (uint32_t j = 0; j < n; ++j)
        {
            a[size_t{col} * n + j] = gf::mul(a[size_t{col} * n + j], scale);
            inv[size_t{col} * n + j] = gf::mul(inv[size_t{col} * n + j], scale);
        }
        for (uint32_t r = 0; r < n; ++r)
        {
            const uint8_t f = a[size_t{r} * n + col];
            if (r == col || f == 0)
                continue;
            for (uint32_t j = 0; j < n; ++j)
            {
                a[size_t{r} * n + j] ^= gf::mul(f, a[size_t{col} * n + j]);
                inv[size_t{r} * n + j] ^= gf::mul(f, inv[size_t{col} * n + j]);
            }
        }
    }
    return inv;
}

Digest strip_id_of(const std::vector<Digest>& hashes)
{
    Bytes buf;
    buf.reserve(hashes.size() * 32);
    for (const auto& h : hashes)
        buf.insert(buf.end(), h.begin(), h.end());
    return sha256(buf);
}

EncodedStrip encode_impl(std::span<const Bytes> data, CodecParams params)
{
    params.validate();
    if (data.size() != params.k)
        throw Error{ErrorCode::parameter, "expected " + std::to_string(params.k) +
                                              " data chunks, got " + std::to_string(data.size())};
    uint64_t len = 0;
    for (const auto& d : data)
        len = std::max<uint64_t>(len, d.size());
    if (len == 0)
        throw Error{ErrorCode::length_mismatch, "data chunks must be at least 1 byte"};

    EncodedStrip out;
    out.strip.params = params;
    out.strip.coding_length = len;
    out.chunks.resize(params.total());
    for (uint32_t j = 0; j < params.k; ++j)
    {
        out.strip.data_lengths.push_back(data[j].size());
        out.chunks[j].payload = data[j];
        out.chunks[j].kind = ChunkKind::data;
    }
    for (uint32_t i = 0; i < params.m; ++i)
    {
        auto& parity = out.chunks[params.k + i];
        parity.kind = ChunkKind::parity;
        parity.payload.assign(len, 0);
        for (uint32_t j = 0; j < params.k; ++j)
            mul_add(cauchy(i, j, params.k), data[j], parity.payload.data());
    }
    for (uint32_t idx = 0; idx < params.total(); ++idx)
    {
        out.chunks[idx].index = idx;
        out.chunks[idx].content_hash = sha256(out.chunks[idx].payload);
        out.strip.chunk_hashes.push_back(out.chunks[idx].content_hash);
    }
    out.strip.strip_id = strip_id_of(out.strip.chunk_hashes);
    for (auto& c : out.chunks)
        c.strip_id = out.strip.strip_id;
    return out;
}

// Validates the supplied chunks and picks k distinct indices, data first.
std::vector<const Chunk*> select_chunks(std::span<const Chunk> available, const Strip& strip)
{
    const auto& p = strip.params;
    std::map<uint32_t, const Chunk*> by_index;
    for (const auto& c : available)
    {
        if (c.index >= p.total())
            throw Error{ErrorCode::parameter, "chunk index " + std::to_string(c.index) + " out of range"};
        if (sha256(c.payload) != strip.chunk_hashes[c.index] ||
            c.payload.size() != strip.stored_bytes(c.index))
            throw Error{ErrorCode::corrupt_chunk,
                "chunk " + std::to_string(c.index) + " fails its hash check"};
        by_index.emplace(c.index, &c);
    }
    if (by_index.size() < p.k)
        throw Error{ErrorCode::insufficient_chunks,
            "have " + std::to_string(by_index.size()) + " chunks, need " + std::to_string(p.k)};
    std::vector<const Chunk*> chosen;
    for (const auto& [idx, c] : by_index)
    {
        chosen.push_back(c);
        if (chosen.size() == p.k)
            break;
    }
    return chosen;
}

}  // namespace

namespace gf
{
uint8_t mul(uint8_t a, uint8_t b) noexcept
{
    return tables().mul[a][b];
}

uint8_t inv(uint8_t a)
{
    if (a == 0)
        throw Error{ErrorCode::parameter, "zero has no inverse in GF(256)"};
    const auto& t = tables();
    return t.exp[255 - t.log[a]];
}
}  // namespace gf

void CodecParams::validate() const
{
    if (k < 1 || m < 1)
        throw Error{ErrorCode::parameter, "k and m must both be at least 1"};
    if (k + m > 256)
        throw Error{ErrorCode::parameter, "k + m exceeds the GF(256) limit of 256"};
}

EncodedStrip encode(std::span<const Bytes> data, CodecParams params)
{
    params.validate();
    if (!data.empty())
    {
        const auto len = data.front().size();
        for (const auto& d : data)
            if (d.size() != len)
                throw Error{ErrorCode::length_mismatch, "data chunks have unequal lengths"};
    }
    return encode_impl(data, params);
}

EncodedStrip encode_ragged(std::span<const Bytes> data, CodecParams params)
{
    return encode_impl(data, params);
}

std::vector<Bytes> decode(std::span<const Chunk> available, const Strip& strip)
{
    const auto& p = strip.params;
    const auto chosen = select_chunks(available, strip);
    const uint64_t len = strip.coding_length;

    std::vector<Bytes> out(p.k);
    std::vector<bool> have(p.k, false);
    for (const auto* c : chosen)
        if (c->index < p.k)
        {
            out[c->index] = c->payload;
            have[c->index] = true;
        }
    if (std::all_of(have.begin(), have.end(), [](bool b) { return b; }))
        return out;

    std::vector<uint8_t> matrix;
    matrix.reserve(size_t{p.k} * p.k);
    for (const auto* c : chosen)
    {
        auto row = generator_row(c->index, p);
        matrix.insert(matrix.end(), row.begin(), row.end());
    }
    const auto inverse = invert(std::move(matrix), p.k);

    for (uint32_t j = 0; j < p.k; ++j)
    {
        if (have[j])
            continue;
        Bytes rebuilt(len, 0);
        for (uint32_t r = 0; r < p.k; ++r)
            mul_add(inverse[size_t{j} * p.k + r], chosen[r]->payload, rebuilt.data());
        rebuilt.resize(strip.data_lengths[j]);
        out[j] = std::move(rebuilt);
    }
    return out;
}

Chunk reconstruct_chunk(std::span<const Chunk> available, const Strip& strip, uint32_t index)
{
    const auto& p = strip.params;
    if (index >= p.total())
        throw Error{ErrorCode::parameter, "chunk index out of range"};
    for (const auto& c : available)
        if (c.index == index && sha256(c.payload) == strip.chunk_hashes[index])
            return c;

    auto data = decode(available, strip);
    Chunk out;
    out.strip_id = strip.strip_id;
    out.index = index;
    if (index < p.k)
    {
        out.kind = ChunkKind::data;
        out.payload = std::move(data[index]);
    }
    else
    {
        out.kind = ChunkKind::parity;
        out.payload.assign(strip.coding_length, 0);
        for (uint32_t j = 0; j < p.k; ++j)
            mul_add(cauchy(index - p.k, j, p.k), data[j], out.payload.data());
    }
    out.content_hash = sha256(out.payload);
    if (out.content_hash != strip.chunk_hashes[index])
        throw Error{ErrorCode::integrity, "reconstructed chunk does not match its published hash"};
    return out;
}

std::vector<Bytes> pad_and_split(ByteView blob, uint32_t k)
{
    if (k == 0)
        throw Error{ErrorCode::parameter, "k must be at least 1"};
    const uint64_t chunk_len = framed_chunk_length(blob.size(), k);
    ByteWriter w;
    w.u64(blob.size());
    w.raw(blob);
    Bytes framed = w.take();
    framed.resize(chunk_len * k, 0);

    std::vector<Bytes> chunks(k);
    for (uint32_t i = 0; i < k; ++i)
        chunks[i].assign(framed.begin() + static_cast<std::ptrdiff_t>(i * chunk_len),
            framed.begin() + static_cast<std::ptrdiff_t>((i + 1) * chunk_len));
    return chunks;
}

Bytes join_and_unpad(std::span<const Bytes> chunks)
{
    Bytes joined;
    for (const auto& c : chunks)
        joined.insert(joined.end(), c.begin(), c.end());
    ByteReader r{joined};
    const uint64_t len = r.u64();
    if (len > r.remaining())
        throw Error{ErrorCode::parse, "framed length exceeds chunk data"};
    auto body = r.raw(len);
    return Bytes{body.begin(), body.end()};
}

}  // namespace ecchain::codec
