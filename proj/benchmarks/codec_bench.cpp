// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <ecchain/cold_trie_codec.hpp>
#include <ecchain/erasure_codec.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace ecchain;

namespace
{
std::vector<Bytes> random_chunks(uint32_t k, size_t blob)
{
    std::mt19937_64 rng{k * 7919 + blob};
    Bytes b(blob);
    for (auto& x : b)
        x = static_cast<uint8_t>(rng());
    return codec::pad_and_split(b, k);
}

void BM_encode(benchmark::State& st)
{
    const auto k = static_cast<uint32_t>(st.range(0));
    const auto blob = static_cast<size_t>(st.range(1));
    const auto data = random_chunks(k, blob);
    for (auto _ : st)
        benchmark::DoNotOptimize(codec::encode(data, {k, k}));
    st.SetBytesProcessed(int64_t(st.iterations()) * int64_t(blob));
}

// worst case: every data chunk lost, decode from parity alone
void BM_decode_from_parity(benchmark::State& st)
{
    const auto k = static_cast<uint32_t>(st.range(0));
    const auto blob = static_cast<size_t>(st.range(1));
    const auto enc = codec::encode(random_chunks(k, blob), {k, k});
    const std::vector<codec::Chunk> parity(enc.chunks.begin() + k, enc.chunks.end());
    for (auto _ : st)
        benchmark::DoNotOptimize(codec::decode(parity, enc.strip));
    st.SetBytesProcessed(int64_t(st.iterations()) * int64_t(blob));
}

void BM_reconstruct_one(benchmark::State& st)
{
    const auto k = static_cast<uint32_t>(st.range(0));
    const auto enc = codec::encode(random_chunks(k, 1 << 20), {k, k});
    const std::vector<codec::Chunk> rest(enc.chunks.begin() + 1, enc.chunks.begin() + 1 + k);
    for (auto _ : st)
        benchmark::DoNotOptimize(codec::reconstruct_chunk(rest, enc.strip, 0));
}

void BM_encode_cold_trie(benchmark::State& st)
{
    std::mt19937_64 rng{42};
    trie::Trie t;
    for (int64_t i = 0; i < st.range(0); ++i)
    {
        trie::Key key;
        for (auto& x : key)
            x = static_cast<uint8_t>(rng());
        t.put(key, Bytes(24, static_cast<uint8_t>(i)));
    }
    const auto k = static_cast<uint32_t>(st.range(1));
    for (auto _ : st)
        benchmark::DoNotOptimize(cold::encode_trie(t, k));
}
}  // namespace

BENCHMARK(BM_encode)->ArgsProduct({{4, 16, 64}, {64 << 10, 1 << 20}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_decode_from_parity)->ArgsProduct({{4, 16, 64}, {1 << 20}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_reconstruct_one)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_encode_cold_trie)->ArgsProduct({{1000, 20000}, {4, 16}})->Unit(benchmark::kMillisecond);
