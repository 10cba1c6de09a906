// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
