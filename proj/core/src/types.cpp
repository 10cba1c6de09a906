// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/types.hpp>

#include <openssl/sha.h>

namespace ecchain
{
std::string_view to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::parameter:
        return "parameter";
    case ErrorCode::length_mismatch:
        return "length-mismatch";
    case ErrorCode::insufficient_chunks:
        return "insufficient-chunks";
    case ErrorCode::corrupt_chunk:
        return "corrupt-chunk";
    case ErrorCode::missing_data:
        return "missing-data";
    case ErrorCode::unavailable:
        return "unavailable";
    case ErrorCode::integrity:
        return "integrity";
    case ErrorCode::missing_node:
        return "missing-node";
    case ErrorCode::unknown_state:
        return "unknown-state";
    case ErrorCode::collision:
        return "collision";
    case ErrorCode::precondition:
        return "precondition";
    case ErrorCode::alignment:
        return "alignment";
    case ErrorCode::divergence:
        return "divergence";
    case ErrorCode::config:
        return "config";
    case ErrorCode::parse:
        return "parse";
    }
    return "unknown";
}

Digest sha256(ByteView data)
{
    Digest out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

std::string to_hex(ByteView data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data)
    {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

namespace
{
int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw Error{ErrorCode::parse, "odd-length hex string"};
    Bytes out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
    {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw Error{ErrorCode::parse, "invalid hex digit"};
        out[i] = static_cast<uint8_t>(hi << 4 | lo);
    }
    return out;
}

ByteView ByteReader::raw(size_t n)
{
    if (remaining() < n)
        throw Error{ErrorCode::parse, "truncated input"};
    auto v = in_.subspan(pos_, n);
    pos_ += n;
    return v;
}

Digest ByteReader::digest()
{
    Digest d;
    auto v = raw(d.size());
    std::copy(v.begin(), v.end(), d.begin());
    return d;
}

uint64_t ByteReader::get_be(int width)
{
    auto v = raw(static_cast<size_t>(width));
    uint64_t x = 0;
    for (auto b : v)
        x = x << 8 | b;
    return x;
}

}  // namespace ecchain
