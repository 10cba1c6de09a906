// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/types.hpp>

#include <cstdint>
#include <span>
#include <vector>

/// Systematic Reed-Solomon over GF(2^8).
///
/// The generator is [I; C] where C is the m x k Cauchy matrix
/// C[i][j] = 1 / (x_i + y_j), x_i = k + i, y_j = j. Every square submatrix of
/// a Cauchy matrix is invertible, so any k rows of [I; C] are too. Symbols are
/// bytes, which caps k + m at 256.
namespace ecchain::codec
{
struct CodecParams
{
    uint32_t k = 0;
    uint32_t m = 0;

    uint32_t total() const noexcept { return k + m; }

    /// Throws Error{parameter} unless k >= 1, m >= 1 and k + m <= 256.
    void validate() const;

    friend bool operator==(const CodecParams&, const CodecParams&) = default;
};

enum class ChunkKind : uint8_t
{
    data,
    parity,
};

struct Chunk
{
    Digest strip_id{};
    uint32_t index = 0;
    ChunkKind kind = ChunkKind::data;
    Bytes payload;
    Digest content_hash{};
};

/// Strip metadata. This is what every node keeps (the published hash set).
struct Strip
{
    Digest strip_id{};
    CodecParams params;
    std::vector<Digest> chunk_hashes;

    /// Length every chunk is zero-extended to for coding. Data chunks of a
    /// ragged strip may be stored shorter than this; their true lengths are
    /// in data_lengths.
    uint64_t coding_length = 0;
    std::vector<uint64_t> data_lengths;

    uint64_t stored_bytes(uint32_t index) const
    {
        return index < params.k ? data_lengths[index] : coding_length;
    }
};

struct EncodedStrip
{
    Strip strip;
    std::vector<Chunk> chunks;  ///< all k + m chunks, index order
};

/// Encodes k equal-length data chunks into a strip of k + m chunks.
/// Throws Error{length_mismatch} if lengths differ or are zero, and
/// Error{parameter} on bad params or a wrong chunk count.
EncodedStrip encode(std::span<const Bytes> data, CodecParams params);

/// Like encode() but accepts data chunks of differing lengths. Each data
/// chunk is coded as if zero-extended to the longest one and is stored at
/// its own length. Used when two strips are concatenated during a merge.
EncodedStrip encode_ragged(std::span<const Bytes> data, CodecParams params);

/// Recovers the k data chunks (at their stored lengths) from any k chunks.
///
/// Every supplied chunk is checked against strip.chunk_hashes before any
/// arithmetic: a mismatch throws Error{corrupt_chunk} naming the index.
/// Fewer than k distinct indices throws Error{insufficient_chunks}.
std::vector<Bytes> decode(std::span<const Chunk> available, const Strip& strip);

/// Rebuilds a single chunk (data or parity) from any k chunks of the strip.
Chunk reconstruct_chunk(std::span<const Chunk> available, const Strip& strip, uint32_t index);

/// Frames a blob as [u64 length BE][blob][zero pad] and splits it into k
/// equal chunks. Throws Error{parameter} for k == 0.
std::vector<Bytes> pad_and_split(ByteView blob, uint32_t k);

/// Inverse of pad_and_split. Chunks are concatenated in order; trailing
/// padding is ignored. Throws Error{parse} on a malformed header.
Bytes join_and_unpad(std::span<const Bytes> chunks);

/// Chunk length pad_and_split produces for a blob of the given size.
inline uint64_t framed_chunk_length(uint64_t blob_size, uint32_t k) noexcept
{
    return (blob_size + 8 + k - 1) / k;
}

namespace gf
{
uint8_t mul(uint8_t a, uint8_t b) noexcept;
uint8_t inv(uint8_t a);
}  // namespace gf

}  // namespace ecchain::codec
