#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hkrt/crypto.hpp"
#include "hkrt/messages.hpp"

// Seeded discrete-event harness. One TTP, a set of RSUs and a population of
// OBUs run in synchronous rounds grouped into epochs; all randomness comes
// from SimConfig::seed.
namespace hkrt::sim {

using crypto::Pseudonym;
using protocol::ObuId;
using protocol::RsuId;

struct SimConfig {
    std::uint64_t seed = 1;
    unsigned k = 4;
    std::uint32_t num_rsus = 5;
    std::uint32_t num_obus = 2000;    // active (querying) vehicles
    std::uint32_t num_revoked = 1000; // revoked pseudonyms, revoked by vehicle
    std::uint32_t epochs = 10;
    std::uint32_t queries_per_epoch = 20000;
    double zipf_exponent = 1.2;
    double public_vehicle_fraction = 0.1;
    double public_query_multiplier = 5.0;
    unsigned trust_threshold = 3;
    std::vector<RsuId> cheater_rsu_ids;
    std::uint64_t max_root_age = 1;

    std::uint32_t pseudonyms_per_vehicle = 4;
    std::uint32_t rounds_per_epoch = 10;
    double ewma_alpha = 1.0;
    double rsu_reachability = 1.0; // probability an OBU has an RSU in range
    crypto::Backend backend = crypto::Backend::Test;
    bool assert_invariants = false;

    /// Throws Error(InvalidConfig) naming the offending field.
    void validate() const;

    [[nodiscard]] std::string to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static SimConfig from_json(const std::string& text);
};

// ---------------------------------------------------------------------------
// Workload

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    /// Uniform in [0, 1) with 53 bits.
    double unit();

private:
    std::mt19937_64 engine_;
};

struct Vehicle {
    std::vector<std::uint32_t> pseudonyms; // indices into Population::pseudonyms
    bool is_public = false;
    bool revoked = false;
};

/// Vehicles 0..num_obus-1 are active; the rest are revoked and together own
/// exactly num_revoked pseudonyms.
struct Population {
    std::vector<Pseudonym> pseudonyms;
    std::vector<std::uint32_t> owner; // per pseudonym
    std::vector<std::uint32_t> rank;  // popularity rank per pseudonym, 1 = most popular
    std::vector<Vehicle> vehicles;

    [[nodiscard]] std::size_t active_count() const;
};

Population make_population(const SimConfig& cfg);

/// Unnormalised query weight per pseudonym: rank^-s, times the multiplier
/// for pseudonyms of public vehicles.
std::vector<double> target_weights(const SimConfig& cfg, const Population& pop);

struct QueryEvent {
    std::uint32_t epoch = 0; // 0-based index into the simulated epochs
    std::uint32_t round = 0;
    ObuId querier = 0;
    std::uint32_t target = 0; // index into Population::pseudonyms
    friend bool operator==(const QueryEvent&, const QueryEvent&) = default;
};

std::vector<QueryEvent> gen_workload(const SimConfig& cfg);
std::vector<QueryEvent> gen_workload(const SimConfig& cfg, const Population& pop);

/// Depth of every leaf in the balanced complete k-ary tree over t leaves.
unsigned balanced_depth(std::size_t t, unsigned k);

// ---------------------------------------------------------------------------
// Metrics

struct EpochMetrics {
    std::uint64_t epoch = 0; // TTP epoch the queries were answered under
    std::uint64_t leaf_count = 0;
    std::uint64_t weighted_path_length = 0;
    std::uint64_t proof_responses = 0;
    double mean_proof_depth = 0;
    unsigned baseline_depth = 0;
    std::uint64_t impeachments_accepted = 0;
};

struct MetricsReport {
    std::uint64_t queries = 0;
    std::uint64_t revoked_cache_hits = 0;
    std::uint64_t reliable_cache_hits = 0;
    std::uint64_t provisional_accepts = 0;
    std::uint64_t rsu_queries = 0;
    std::uint64_t reasks = 0;
    std::uint64_t proof_responses = 0;
    std::uint64_t ok_responses = 0;
    double weighted_mean_proof_depth = 0;
    double baseline_mean_proof_depth = 0;
    double depth_ratio = 0;
    double proof_bytes_mean = 0;
    double baseline_proof_bytes_mean = 0;
    std::uint64_t impeachments_emitted = 0;
    std::uint64_t impeachments_accepted = 0;
    std::uint64_t impeachments_dismissed = 0;
    std::uint64_t cheaters_revoked = 0;
    std::uint64_t honest_rsus_revoked = 0;
    std::uint64_t first_cheater_revocation_epoch = 0; // 0 if none
    std::uint64_t invalid_oks = 0;
    std::uint64_t rejected_proofs = 0;
    std::uint64_t invariant_checks = 0;
    std::uint64_t final_epoch = 0;
    std::uint64_t final_leaf_count = 0;
    std::vector<EpochMetrics> series;

    /// One "name<TAB>value" line per scalar metric.
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_json() const;
    /// Header plus one row per simulated epoch.
    [[nodiscard]] std::string series_csv() const;
};

MetricsReport run_simulation(const SimConfig& cfg);

/// Fixed-point decimal, locale independent.
std::string format_double(double v, int precision = 6);

} // namespace hkrt::sim
