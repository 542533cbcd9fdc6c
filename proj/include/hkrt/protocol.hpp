#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "hkrt/codec.hpp"
#include "hkrt/crypto.hpp"
#include "hkrt/messages.hpp"
#include "hkrt/tree.hpp"

// TTP, RSU and OBU state machines. Each actor consumes one message at a time
// and talks to the others only through values from messages.hpp.
//
// Timestamps are epochs. Every published tree version has its own epoch:
// revocations and periodic updates both advance it. An 'OK' at epoch e is
// contradicted by a revocation proof whose leaf was revoked at epoch <= e.
namespace hkrt::protocol {

// ---------------------------------------------------------------------------
// TTP

enum class RsuStatus : std::uint8_t { Active, Revoked };

struct RevokeOutcome {
    bool already_revoked = false;
    std::optional<TreeUpdate> update; // set unless already_revoked
};

enum class DismissReason : std::uint8_t {
    UnknownRsu,
    AlreadyRevoked,
    BadOkSignature,
    InvalidProof,
    NoContradiction,
    NotRevokedAtOkEpoch,
};

std::string_view dismiss_reason_name(DismissReason reason) noexcept;

struct ImpeachmentOutcome {
    bool rsu_revoked = false;
    DismissReason reason = DismissReason::UnknownRsu; // when dismissed
    std::optional<RsuRevocationNotice> notice;         // when revoked
};

class Ttp {
public:
    /// ewma_alpha in (0, 1]; 1 means frequencies are the plain per-epoch sums.
    Ttp(const crypto::Seed& seed, unsigned k, double ewma_alpha = 1.0,
        crypto::Backend backend = crypto::Backend::Test);

    [[nodiscard]] const crypto::MasterKeys& master() const noexcept { return master_; }
    [[nodiscard]] const Bytes& master_public() const noexcept { return master_.master_public; }
    [[nodiscard]] std::uint64_t epoch() const noexcept { return state_.epoch(); }
    [[nodiscard]] unsigned k() const noexcept { return k_; }
    [[nodiscard]] const codec::TreeState& state() const noexcept { return state_; }
    [[nodiscard]] TreeUpdate snapshot() const { return {codec::encode_state(state_)}; }

    /// Issues private keys for every pseudonym of a new OBU.
    std::vector<crypto::PseudonymPrivateKey> register_obu(ObuId id, std::span<const Pseudonym> pseudonyms);
    crypto::PseudonymPrivateKey register_rsu(RsuId id);

    [[nodiscard]] bool is_obu_revoked(ObuId id) const { return revoked_obus_.contains(id); }
    [[nodiscard]] RsuStatus rsu_status(RsuId id) const;
    [[nodiscard]] std::vector<RsuId> active_rsus() const;

    /// Inserts every pseudonym of the OBU (revocation_epoch = the new epoch,
    /// frequency 0), rebuilds and signs. Throws Error(UnknownObu).
    RevokeOutcome revoke_obu(ObuId id);
    /// Batch form: one rebuild and one epoch step for all newly revoked OBUs.
    RevokeOutcome revoke_obus(std::span<const ObuId> ids);

    /// Accumulates an RSU's counters for the current reporting period.
    /// Returns false (and ignores the report) for unknown or revoked RSUs and
    /// for epochs outside the open period.
    bool receive_report(RsuId from, const FrequencyReport& report);

    /// Closes the reporting period: folds reports into leaf frequencies,
    /// removes `expired`, advances the epoch and returns the full snapshot.
    TreeUpdate epoch_update(std::span<const Pseudonym> expired);

    ImpeachmentOutcome handle_impeachment(const Impeachment& imp);

    /// Aggregated (possibly smoothed) frequency used for the current tree.
    [[nodiscard]] std::uint64_t frequency_of(const Pseudonym& p) const;
    /// True if `p` was a leaf of the published tree at `epoch`.
    [[nodiscard]] bool was_revoked_at(const Pseudonym& p, std::uint64_t epoch) const;

private:
    struct Interval {
        std::uint64_t from = 0;
        std::optional<std::uint64_t> until; // exclusive
    };

    void publish(std::vector<tree::RevokedLeaf> leaves, std::uint64_t new_epoch);

    crypto::MasterKeys master_;
    unsigned k_;
    double alpha_;
    codec::TreeState state_;
    std::map<Pseudonym, tree::RevokedLeaf> leaves_;
    std::map<Pseudonym, double> smoothed_;
    std::map<ObuId, std::vector<Pseudonym>> obu_registry_;
    std::set<ObuId> revoked_obus_;
    std::map<RsuId, RsuStatus> rsu_registry_;
    std::map<Pseudonym, std::uint64_t> pending_counts_;
    std::uint64_t period_start_ = 0;
    std::map<Pseudonym, std::vector<Interval>> history_;
};

// ---------------------------------------------------------------------------
// RSU

enum class RsuBehavior : std::uint8_t { Honest, Cheater };

class Rsu {
public:
    Rsu(RsuId id, crypto::PseudonymPrivateKey key, Bytes ttp_master_public, const TreeUpdate& initial,
        RsuBehavior behavior = RsuBehavior::Honest);

    [[nodiscard]] RsuId id() const noexcept { return id_; }
    [[nodiscard]] RsuBehavior behavior() const noexcept { return behavior_; }
    [[nodiscard]] std::uint64_t epoch() const noexcept { return state_.epoch(); }
    [[nodiscard]] const codec::TreeState& state() const noexcept { return state_; }

    /// Installs a newer snapshot; the rebuilt root must match and carry a
    /// valid TTP signature. Older or same-epoch snapshots are ignored
    /// (returns false).
    bool apply_update(const TreeUpdate& update);

    /// Proof for revoked pseudonyms (counted), signed 'OK' otherwise. A
    /// cheater answers 'OK' to everything.
    Response handle_query(const Query& q);

    /// Snapshot and reset of the query counters. Throws Error(EpochMismatch)
    /// unless `epoch` is the RSU's current epoch.
    FrequencyReport report_frequencies(std::uint64_t epoch);

    [[nodiscard]] const std::map<Pseudonym, std::uint64_t>& counters() const noexcept { return counters_; }
    [[nodiscard]] std::uint64_t proofs_since_report() const noexcept { return proofs_since_report_; }

private:
    RsuId id_;
    crypto::PseudonymPrivateKey key_;
    Bytes ttp_mpu_;
    RsuBehavior behavior_;
    codec::TreeState state_;
    std::map<Pseudonym, std::uint64_t> counters_;
    std::uint64_t proofs_since_report_ = 0;
};

// ---------------------------------------------------------------------------
// OBU

enum class Decision : std::uint8_t { Reject, Accept, MustQuery, AcceptProvisional };

std::string_view decision_name(Decision d) noexcept;

struct ResponseOutcome {
    enum class Kind : std::uint8_t { Revoked, Reliable, Pending, Discarded };
    Kind kind = Kind::Discarded;
    std::vector<Impeachment> impeachments;
};

class Obu {
public:
    Obu(ObuId id, std::vector<crypto::PseudonymPrivateKey> keys, Bytes ttp_master_public,
        unsigned trust_threshold = 3, std::uint64_t max_root_age = 1);

    [[nodiscard]] ObuId id() const noexcept { return id_; }
    [[nodiscard]] const std::vector<crypto::PseudonymPrivateKey>& keys() const noexcept { return keys_; }
    [[nodiscard]] unsigned trust_threshold() const noexcept { return threshold_; }

    /// Local decision from the two caches. With no RSU in reach an unknown
    /// pseudonym is accepted provisionally.
    [[nodiscard]] Decision check(const Pseudonym& p, bool rsu_reachable = true) const;

    /// Processes the answer to a query about `asked`.
    ResponseOutcome process_response(const Response& resp, const Pseudonym& asked, std::uint64_t current_epoch);

    /// Drops reliable entries whose newest supporting 'OK' predates `epoch`.
    void advance_epoch(std::uint64_t epoch);

    /// Forgets every 'OK' signed by a revoked RSU and ignores it from now on.
    void on_rsu_revoked(const RsuRevocationNotice& notice);

    [[nodiscard]] bool is_revoked_cached(const Pseudonym& p) const { return revoked_.contains(p); }
    [[nodiscard]] bool is_reliable_cached(const Pseudonym& p) const { return reliable_.contains(p); }
    [[nodiscard]] std::size_t revoked_cache_size() const noexcept { return revoked_.size(); }
    [[nodiscard]] std::size_t reliable_cache_size() const noexcept { return reliable_.size(); }
    [[nodiscard]] std::vector<Pseudonym> pending_pseudonyms() const;
    [[nodiscard]] const std::vector<OkResponse>* pending(const Pseudonym& p) const;
    /// Whether `rsu` already answered 'OK' for a pending pseudonym.
    [[nodiscard]] bool pending_answered_by(const Pseudonym& p, RsuId rsu) const;
    [[nodiscard]] bool caches_disjoint() const;
    [[nodiscard]] std::uint64_t invalid_ok_count() const noexcept { return invalid_oks_; }
    [[nodiscard]] std::uint64_t rejected_proof_count() const noexcept { return rejected_proofs_; }

private:
    struct ReliableEntry {
        std::vector<OkResponse> support;
        std::uint64_t newest_epoch = 0;
    };

    ResponseOutcome on_proof(const ProofResponse& resp, const Pseudonym& asked, std::uint64_t current_epoch);
    ResponseOutcome on_ok(const OkResponse& ok, const Pseudonym& asked);

    ObuId id_;
    std::vector<crypto::PseudonymPrivateKey> keys_;
    Bytes ttp_mpu_;
    unsigned threshold_;
    std::uint64_t max_root_age_;
    std::map<Pseudonym, tree::RevocationProof> revoked_;
    std::map<Pseudonym, ReliableEntry> reliable_;
    std::map<Pseudonym, std::vector<OkResponse>> pending_;
    std::set<RsuId> revoked_rsus_;
    std::uint64_t invalid_oks_ = 0;
    std::uint64_t rejected_proofs_ = 0;
};

} // namespace hkrt::protocol
