// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/workload.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace ecchain::workload
{
namespace
{
std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

Error parse_error(size_t line_no, const std::string& what)
{
    return Error{ErrorCode::parse, "line " + std::to_string(line_no) + ": " + what};
}

uint64_t parse_u64(std::string_view s, size_t line_no, const char* field)
{
    uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw parse_error(line_no, std::string{"bad "} + field + " '" + std::string{s} + "'");
    return v;
}

std::vector<Addr> parse_list(std::string_view s, size_t line_no)
{
    std::vector<Addr> out;
    s = trim(s);
    while (!s.empty())
    {
        const auto comma = s.find(',');
        const auto item = trim(s.substr(0, comma));
        try
        {
            out.push_back(parse_addr(item));
        }
        catch (const Error& e)
        {
            throw parse_error(line_no, e.what());
        }
        if (comma == std::string_view::npos)
            break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

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

Addr parse_addr(std::string_view hex)
{
    if (hex.size() != 32)
        throw Error{ErrorCode::parse, "address '" + std::string{hex} + "' is not 32 hex characters"};
    Addr a{};
    for (size_t i = 0; i < 16; ++i)
    {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw Error{ErrorCode::parse, "address '" + std::string{hex} + "' has a non-hex character"};
        a[i] = static_cast<uint8_t>(hi * 16 + lo);
    }
    return a;
}

std::string format_addr(const Addr& a)
{
    return to_hex(ByteView{a.data(), a.size()});
}

Record parse_record(std::string_view line, size_t line_no)
{
    Record r;
    bool seen_h = false, seen_size = false;
    while (!trim(line).empty())
    {
        const auto semi = line.find(';');
        const auto field = trim(line.substr(0, semi));
        line = semi == std::string_view::npos ? std::string_view{} : line.substr(semi + 1);
        if (field.empty())
            continue;
        const auto eq = field.find('=');
        if (eq == std::string_view::npos)
            throw parse_error(line_no, "field '" + std::string{field} + "' has no '='");
        const auto name = trim(field.substr(0, eq));
        const auto value = trim(field.substr(eq + 1));
        if (name == "h")
        {
            r.height = parse_u64(value, line_no, "height");
            seen_h = true;
        }
        else if (name == "access")
            r.access = parse_list(value, line_no);
        else if (name == "create")
            r.create = parse_list(value, line_no);
        else if (name == "size")
        {
            r.size = parse_u64(value, line_no, "size");
            seen_size = true;
        }
        else
            throw parse_error(line_no, "unknown field '" + std::string{name} + "'");
    }
    if (!seen_h)
        throw parse_error(line_no, "missing h=");
    if (!seen_size)
        throw parse_error(line_no, "missing size=");
    return r;
}

std::string format_record(const Record& r)
{
    std::string out = "h=" + std::to_string(r.height) + "; access=";
    for (size_t i = 0; i < r.access.size(); ++i)
        out += (i ? "," : "") + format_addr(r.access[i]);
    out += "; create=";
    for (size_t i = 0; i < r.create.size(); ++i)
        out += (i ? "," : "") + format_addr(r.create[i]);
    out += "; size=" + std::to_string(r.size);
    return out;
}

std::vector<Record> parse(std::istream& in)
{
    std::vector<Record> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        auto r = parse_record(t, line_no);
        if (!out.empty() && r.height != out.back().height + 1)
            throw parse_error(line_no, "height " + std::to_string(r.height) + " does not follow " +
                                           std::to_string(out.back().height));
        if (out.empty() && r.height == 0)
            throw parse_error(line_no, "heights start at 1");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Record> load(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in)
        throw Error{ErrorCode::config, "cannot open workload '" + path.string() + "'"};
    return parse(in);
}

void write(std::ostream& out, std::span<const Record> records)
{
    for (const auto& r : records)
        out << format_record(r) << '\n';
}

trie::Key state_key(const Addr& a)
{
    return sha256(ByteView{a.data(), a.size()});
}

Bytes state_value(const Addr& a, uint64_t height)
{
    ByteWriter w;
    w.raw(ByteView{a.data(), a.size()});
    w.u64(height);
    return w.take();
}

state::BlockAccess to_block_access(const Record& r)
{
    state::BlockAccess b;
    b.height = r.height;
    for (const auto& a : r.access)
        b.access.push_back(state_key(a));
    for (const auto& a : r.create)
        b.create.emplace_back(state_key(a), state_value(a, r.height));
    return b;
}

Bytes block_payload(const Record& r)
{
    Bytes out(r.size);
    std::mt19937_64 rng{r.height};
    for (size_t i = 0; i < out.size(); i += 8)
    {
        const uint64_t v = rng();
        for (size_t j = 0; j < 8 && i + j < out.size(); ++j)
            out[i + j] = static_cast<uint8_t>(v >> (8 * j));
    }
    return out;
}

void ZipfParams::validate() const
{
    if (addresses == 0)
        throw Error{ErrorCode::config, "addresses must be at least 1"};
    if (!(s >= 0.0) || !std::isfinite(s))
        throw Error{ErrorCode::config, "zipf_s must be a non-negative number"};
    if (size_min > size_max)
        throw Error{ErrorCode::config, "size_min exceeds size_max"};
}

namespace
{
std::vector<double> zipf_weights(const ZipfParams& p)
{
    std::vector<double> w(p.addresses);
    for (uint64_t r = 0; r < p.addresses; ++r)
        w[r] = 1.0 / std::pow(static_cast<double>(r + 1), p.s);
    return w;
}
}  // namespace

ZipfGenerator::ZipfGenerator(ZipfParams p) : p_{p}, rng_{p.seed}
{
    p_.validate();
    const auto w = zipf_weights(p_);
    rank_ = std::discrete_distribution<uint64_t>(w.begin(), w.end());
    addrs_.reserve(p_.addresses);
    for (uint64_t r = 0; r < p_.addresses; ++r)
    {
        ByteWriter bw;
        bw.u64(p_.seed);
        bw.u64(r);
        const auto d = sha256(bw.bytes());
        Addr a;
        std::copy_n(d.begin(), a.size(), a.begin());
        addrs_.push_back(a);
    }
    created_.assign(p_.addresses, false);
}

Record ZipfGenerator::next()
{
    Record r;
    r.height = ++height_;
    std::unordered_set<uint64_t> seen;
    for (uint32_t i = 0; i < p_.accesses_per_block; ++i)
    {
        const auto rank = rank_(rng_);
        if (!seen.insert(rank).second)
            continue;
        if (created_[rank])
            r.access.push_back(addrs_[rank]);
        else
        {
            created_[rank] = true;
            r.create.push_back(addrs_[rank]);
        }
    }
    r.size = p_.size_min + (p_.size_max > p_.size_min ? rng_() % (p_.size_max - p_.size_min + 1) : 0);
    return r;
}

std::vector<Record> generate_zipf(const ZipfParams& p, uint64_t blocks)
{
    ZipfGenerator g{p};
    std::vector<Record> out;
    out.reserve(blocks);
    for (uint64_t i = 0; i < blocks; ++i)
        out.push_back(g.next());
    return out;
}

}  // namespace ecchain::workload
