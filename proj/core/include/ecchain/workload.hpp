// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/dual_trie_manager.hpp>
#include <ecchain/types.hpp>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

/// Block-level access traces.
///
/// One record per line:
///
///   h=<height>; access=<addr,...>; create=<addr,...>; size=<bytes>
///
/// Addresses are 32 hex characters. Lists may be empty. Blank lines and
/// lines starting with '#' are ignored. Heights must be consecutive.
namespace ecchain::workload
{
using Addr = std::array<uint8_t, 16>;

struct AddrHash
{
    size_t operator()(const Addr& a) const noexcept
    {
        size_t h = 0;
        for (size_t i = 0; i < sizeof(size_t); ++i)
            h = (h << 8) | a[i];
        return h;
    }
};

struct Record
{
    uint64_t height = 0;
    std::vector<Addr> access;
    std::vector<Addr> create;
    uint64_t size = 0;
};

Addr parse_addr(std::string_view hex);
std::string format_addr(const Addr& a);

/// Throws Error{parse} naming `line_no`.
Record parse_record(std::string_view line, size_t line_no);
std::string format_record(const Record& r);

/// Parses a whole trace. Throws Error{parse} with the offending line number.
std::vector<Record> parse(std::istream& in);
std::vector<Record> load(const std::filesystem::path& path);
void write(std::ostream& out, std::span<const Record> records);

/// Trie key of an address: H(addr).
trie::Key state_key(const Addr& a);
/// Value stored for a state created at `height`: [16 addr][u64 height].
Bytes state_value(const Addr& a, uint64_t height);
state::BlockAccess to_block_access(const Record& r);
/// Deterministic block body of exactly r.size bytes.
Bytes block_payload(const Record& r);

struct ZipfParams
{
    uint64_t addresses = 1000;
    uint32_t accesses_per_block = 8;
    double s = 1.0;
    uint64_t size_min = 200;
    uint64_t size_max = 600;
    uint64_t seed = 1;

    /// Throws Error{config} naming the bad field.
    void validate() const;
};

/// Streams records with Zipf-ranked accesses. An address is created the
/// first time it is drawn and accessed afterwards.
class ZipfGenerator
{
public:
    explicit ZipfGenerator(ZipfParams p);
    Record next();
    const Addr& address(uint64_t rank) const { return addrs_[rank]; }

private:
    ZipfParams p_;
    std::mt19937_64 rng_;
    std::discrete_distribution<uint64_t> rank_;
    std::vector<Addr> addrs_;
    std::vector<bool> created_;
    uint64_t height_ = 0;
};

std::vector<Record> generate_zipf(const ZipfParams& p, uint64_t blocks);

}  // namespace ecchain::workload
