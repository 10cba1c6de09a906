// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecchain
{
using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

/// 256-bit digest. Also used as trie key and node identifier.
using Digest = std::array<uint8_t, 32>;

inline constexpr Digest zero_digest{};

struct DigestHash
{
    size_t operator()(const Digest& d) const noexcept
    {
        size_t h = 0;
        for (int i = 0; i < 8; ++i)
            h = h << 8 | d[i];
        return h;
    }
};

enum class ErrorCode
{
    parameter,
    length_mismatch,
    insufficient_chunks,
    corrupt_chunk,
    missing_data,
    unavailable,
    integrity,
    missing_node,
    unknown_state,
    collision,
    precondition,
    alignment,
    divergence,
    config,
    parse,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error{what}, code_{code} {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// SHA-256 over a byte range.
Digest sha256(ByteView data);

inline Digest sha256(std::string_view s)
{
    return sha256(ByteView{reinterpret_cast<const uint8_t*>(s.data()), s.size()});
}

std::string to_hex(ByteView data);
inline std::string to_hex(const Digest& d)
{
    return to_hex(ByteView{d});
}

/// Parses an even-length hex string. Throws Error{parse} on bad input.
Bytes from_hex(std::string_view hex);

/// Big-endian append-only encoder.
class ByteWriter
{
public:
    void u8(uint8_t v) { out_.push_back(v); }
    void u16(uint16_t v) { put_be(v, 2); }
    void u32(uint32_t v) { put_be(v, 4); }
    void u64(uint64_t v) { put_be(v, 8); }
    void raw(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void digest(const Digest& d) { raw(d); }
    void blob32(ByteView b)
    {
        u32(static_cast<uint32_t>(b.size()));
        raw(b);
    }

    Bytes& bytes() noexcept { return out_; }
    Bytes take() noexcept { return std::move(out_); }

private:
    void put_be(uint64_t v, int width)
    {
        for (int i = width - 1; i >= 0; --i)
            out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    Bytes out_;
};

/// Big-endian bounds-checked decoder. Short reads throw Error{parse}.
class ByteReader
{
public:
    explicit ByteReader(ByteView in) noexcept : in_{in} {}

    uint8_t u8() { return static_cast<uint8_t>(get_be(1)); }
    uint16_t u16() { return static_cast<uint16_t>(get_be(2)); }
    uint32_t u32() { return static_cast<uint32_t>(get_be(4)); }
    uint64_t u64() { return get_be(8); }
    ByteView raw(size_t n);
    Digest digest();
    ByteView blob32() { return raw(u32()); }

    size_t remaining() const noexcept { return in_.size() - pos_; }
    size_t position() const noexcept { return pos_; }

private:
    uint64_t get_be(int width);

    ByteView in_;
    size_t pos_ = 0;
};

}  // namespace ecchain
