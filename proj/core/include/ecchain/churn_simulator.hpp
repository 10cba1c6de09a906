// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ecchain/dual_trie_manager.hpp>
#include <ecchain/group_maintenance.hpp>
#include <ecchain/ledger_store.hpp>
#include <ecchain/workload.hpp>

#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

/// Deterministic churn simulation over a block workload.
///
/// Each epoch appends `blocks_per_epoch` blocks (state accesses run through
/// the dual trie, the cold overlay folds into the encoded base every
/// `cold_epoch_E` blocks), then admits a Poisson(alpha) number of nodes and
/// removes a Poisson(beta) number of grouped nodes chosen uniformly. Metrics
/// are taken after the churn, when the network is quiescent.
namespace ecchain::sim
{
struct SimConfig
{
    uint64_t n_initial = 64;
    double alpha = 4.0;
    double beta = 0.0;
    uint64_t epochs = 50;
    uint64_t blocks_per_epoch = 10;
    uint64_t warmup_blocks = 2000;
    state::ExpiryParams expiry{100, {1, 10}};
    uint64_t distance_D = 100;
    uint64_t cold_epoch_E = 128;
    uint64_t seed = 1;
    std::string workload_path;  ///< empty: Zipf generator
    workload::ZipfParams zipf;
    groups::DataMode mode = groups::DataMode::accounting;
    uint32_t availability_samples = 100;

    /// Throws Error{config} naming the offending field.
    void validate() const;
};

/// Storage held per node, averaged over live nodes.
struct StorageBreakdown
{
    double encoded_mean = 0;   ///< ledger strips + cold strip
    double recent_mean = 0;    ///< unencoded ledger window
    uint64_t hot_bytes = 0;    ///< hot trie + pending cold overlay, on every grouped node
    double total_mean = 0;     ///< everything, staging replicas included
};

struct EpochMetrics
{
    uint64_t epoch = 0;
    uint64_t n_nodes = 0;
    uint64_t n_groups = 0;
    uint64_t staging = 0;
    uint64_t s_bytes = 0;      ///< ledger + full state, serialized
    uint64_t s_enc_bytes = 0;  ///< encoded ledger prefix + cold base
    uint64_t encoded_bytes = 0;  ///< strip chunks held by grouped nodes
    uint64_t proof_bytes = 0;    ///< chunk-hash sets, one copy per group member
    double per_node_bytes_mean = 0;
    /// (encoded_bytes + staging * s_enc_bytes) / s_bytes
    double redundancy_ratio = 0;
    dht::BandwidthLedger bw;      ///< this epoch only
    uint64_t alpha_draw = 0;
    uint64_t beta_draw = 0;
    uint64_t merges = 0;
    uint64_t downgrades = 0;
    StorageBreakdown storage;
    bool available = true;
    std::string unavailable_detail;
};

struct RedundancyCheck
{
    double lower = 0;
    double upper = 0;
    bool ok = false;
};

/// 2(1 - eps) <= ratio <= 2 ceil(log2 n)(1 + eps), eps = 0.10.
RedundancyCheck check_redundancy_bounds(double ratio, uint64_t n);

struct BandwidthCheck
{
    double lower = 0;
    double upper = 0;
    bool checked = false;   ///< alpha draw >= 4
    bool ok = true;
};

/// Upper (5/4 a - 1 + floor(log2 n) + b) S (1 + 0.15), applied when a >= 4.
/// Lower (5/4 a - ceil(log2(a / 4))) S (1 - 0.15) is reported only.
/// Downgrade bytes must be zero when no downgrade fired.
BandwidthCheck check_bandwidth_bounds(const dht::BandwidthLedger& bw, uint64_t alpha_draw, uint64_t beta_draw,
    uint64_t n, uint64_t s_bytes, uint64_t downgrades);

struct BoundRow
{
    uint64_t epoch = 0;
    RedundancyCheck red;
    double red_measured = 0;
    BandwidthCheck bw;
    uint64_t bw_measured = 0;
    bool available = true;
    std::string verdict;  ///< pass, fail or skip
};

BoundRow check_epoch(const EpochMetrics& m);

struct RunResult
{
    std::vector<EpochMetrics> metrics;
    std::vector<BoundRow> bounds;
    bool pass = true;
    uint64_t bw_epochs_skipped = 0;  ///< epochs whose alpha draw was below 4
};

/// The simulated system: chain, dual trie, cold base and node groups.
class Simulator
{
public:
    explicit Simulator(SimConfig config);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// Appends n blocks from the workload (empty records once a trace file
    /// runs out) and keeps encoding and cold folds current.
    void run_blocks(uint64_t n);
    void join(uint64_t n);
    /// Removes n grouped nodes chosen uniformly; returns how many left.
    uint64_t leave(uint64_t n);
    /// Samples encoded blocks and cold keys from random groups. Returns an
    /// error description, or empty when everything was recoverable.
    std::string availability_sweep(uint32_t samples);

    EpochMetrics measure();
    StorageBreakdown storage() const;

    /// Full replica: serialized ledger plus full state trie.
    uint64_t replica_bytes() const;
    /// Encoded portion: ledger up to the furthest encoded height plus cold base.
    uint64_t encoded_portion_bytes() const;

    groups::Cluster& cluster() noexcept { return *cluster_; }
    const ledger::Chain& chain() const noexcept { return chain_; }
    state::DualTrie& dual() noexcept { return dual_; }
    const trie::Trie& cold_base() const noexcept { return base_; }
    const SimConfig& config() const noexcept { return cfg_; }
    std::mt19937_64& rng() noexcept { return rng_; }

private:
    class ChargingReader;

    workload::Record next_record();
    void fold();

    SimConfig cfg_;
    std::mt19937_64 rng_;
    std::optional<workload::ZipfGenerator> gen_;
    std::vector<workload::Record> trace_;
    size_t trace_pos_ = 0;
    ledger::Chain chain_;
    trie::Trie base_;
    std::vector<trie::Key> base_keys_;
    std::unique_ptr<ChargingReader> reader_;
    state::DualTrie dual_;
    std::unique_ptr<groups::Cluster> cluster_;
    uint64_t next_node_ = 0;
    mutable uint64_t replica_cache_height_ = UINT64_MAX;
    mutable uint64_t replica_cache_ = 0;
};

/// Runs the configured churn experiment.
RunResult run(const SimConfig& config);
/// Same experiment on a fresh simulator the caller keeps for inspection.
RunResult run(Simulator& sim);

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> rows);
void write_bounds_csv(std::ostream& out, std::span<const BoundRow> rows);
/// Raw overheads the bounds absorb: encoded portion, hot state, recent
/// window, staging replicas and chunk-hash sets.
void write_overheads_csv(std::ostream& out, std::span<const EpochMetrics> rows);

}  // namespace ecchain::sim
