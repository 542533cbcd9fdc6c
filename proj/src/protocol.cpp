#include "hkrt/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hkrt::protocol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t distinct_rsus(const std::vector<OkResponse>& oks) {
    std::set<RsuId> ids;
    for (const auto& ok : oks) ids.insert(ok.rsu_id);
    return ids.size();
}

} // namespace

std::string_view dismiss_reason_name(DismissReason reason) noexcept {
    switch (reason) {
        case DismissReason::UnknownRsu: return "unknown rsu";
        case DismissReason::AlreadyRevoked: return "rsu already revoked";
        case DismissReason::BadOkSignature: return "bad ok signature";
        case DismissReason::InvalidProof: return "invalid revocation proof";
        case DismissReason::NoContradiction: return "proof does not contradict ok";
        case DismissReason::NotRevokedAtOkEpoch: return "pseudonym not revoked at ok epoch";
    }
    return "unknown";
}

std::string_view decision_name(Decision d) noexcept {
    switch (d) {
        case Decision::Reject: return "reject";
        case Decision::Accept: return "accept";
        case Decision::MustQuery: return "must-query";
        case Decision::AcceptProvisional: return "accept-provisional";
    }
    return "unknown";
}

// --- Ttp ------------------------------------------------------------------

Ttp::Ttp(const crypto::Seed& seed, unsigned k, double ewma_alpha, crypto::Backend backend)
    : master_(crypto::setup(seed, backend)), k_(k), alpha_(ewma_alpha) {
    if (!(ewma_alpha > 0.0 && ewma_alpha <= 1.0)) {
        throw Error(Errc::InvalidConfig, "ewma alpha must be in (0, 1]");
    }
    state_.signed_root = tree::empty_signed_root(0, k, master_);
}

std::vector<crypto::PseudonymPrivateKey> Ttp::register_obu(ObuId id, std::span<const Pseudonym> pseudonyms) {
    if (obu_registry_.contains(id)) {
        throw Error(Errc::InvalidConfig, "obu " + std::to_string(id) + " already registered");
    }
    std::set<Pseudonym> seen;
    for (const auto& p : pseudonyms) {
        if (p.is_ttp()) {
            throw Error(Errc::ReservedPseudonym, "obu " + std::to_string(id));
        }
        if (!seen.insert(p).second) {
            throw Error(Errc::DuplicatePseudonym, p.hex());
        }
    }
    for (const auto& [other, ps] : obu_registry_) {
        for (const auto& p : ps) {
            if (seen.contains(p)) throw Error(Errc::DuplicatePseudonym, p.hex());
        }
    }
    obu_registry_.emplace(id, std::vector<Pseudonym>(pseudonyms.begin(), pseudonyms.end()));
    std::vector<crypto::PseudonymPrivateKey> keys;
    keys.reserve(pseudonyms.size());
    for (const auto& p : pseudonyms) keys.push_back(crypto::extract(master_, p));
    return keys;
}

crypto::PseudonymPrivateKey Ttp::register_rsu(RsuId id) {
    if (!rsu_registry_.emplace(id, RsuStatus::Active).second) {
        throw Error(Errc::InvalidConfig, "rsu " + std::to_string(id) + " already registered");
    }
    return crypto::extract(master_, rsu_identity(id));
}

RsuStatus Ttp::rsu_status(RsuId id) const {
    auto it = rsu_registry_.find(id);
    if (it == rsu_registry_.end()) {
        throw Error(Errc::UnknownRsu, std::to_string(id));
    }
    return it->second;
}

std::vector<RsuId> Ttp::active_rsus() const {
    std::vector<RsuId> out;
    for (const auto& [id, status] : rsu_registry_) {
        if (status == RsuStatus::Active) out.push_back(id);
    }
    return out;
}

RevokeOutcome Ttp::revoke_obu(ObuId id) { return revoke_obus(std::span<const ObuId>(&id, 1)); }

RevokeOutcome Ttp::revoke_obus(std::span<const ObuId> ids) {
    for (auto id : ids) {
        if (!obu_registry_.contains(id)) {
            throw Error(Errc::UnknownObu, std::to_string(id));
        }
    }
    std::set<ObuId> fresh;
    for (auto id : ids) {
        if (!revoked_obus_.contains(id)) fresh.insert(id);
    }
    if (fresh.empty()) {
        return {true, std::nullopt};
    }

    const auto new_epoch = epoch() + 1;
    auto leaves = leaves_;
    for (auto id : fresh) {
        for (const auto& p : obu_registry_.at(id)) {
            leaves.emplace(p, tree::RevokedLeaf{p, new_epoch, 0});
        }
    }
    std::vector<tree::RevokedLeaf> list;
    for (const auto& [p, leaf] : leaves) list.push_back(leaf);
    publish(std::move(list), new_epoch);

    for (auto id : fresh) {
        for (const auto& p : obu_registry_.at(id)) {
            if (!leaves_.contains(p)) history_[p].push_back({new_epoch, std::nullopt});
        }
        revoked_obus_.insert(id);
    }
    leaves_ = std::move(leaves);
    return {false, snapshot()};
}

bool Ttp::receive_report(RsuId from, const FrequencyReport& report) {
    auto it = rsu_registry_.find(from);
    if (it == rsu_registry_.end() || it->second != RsuStatus::Active) {
        return false;
    }
    if (report.epoch < period_start_ || report.epoch > epoch()) {
        return false;
    }
    for (const auto& [p, count] : report.counters) {
        pending_counts_[p] += count;
    }
    return true;
}

TreeUpdate Ttp::epoch_update(std::span<const Pseudonym> expired) {
    const auto new_epoch = epoch() + 1;
    auto leaves = leaves_;
    auto smoothed = smoothed_;
    for (auto& [p, leaf] : leaves) {
        auto it = pending_counts_.find(p);
        const std::uint64_t reported = it == pending_counts_.end() ? 0 : it->second;
        if (alpha_ == 1.0) {
            leaf.frequency = reported;
            smoothed[p] = static_cast<double>(reported);
        } else {
            auto& s = smoothed[p];
            s = alpha_ * static_cast<double>(reported) + (1.0 - alpha_) * s;
            leaf.frequency = static_cast<std::uint64_t>(std::llround(s));
        }
    }

    for (const auto& p : expired) {
        if (!leaves_.contains(p)) throw Error(Errc::UnknownPseudonym, p.hex());
    }
    const std::set<Pseudonym> expired_set(expired.begin(), expired.end());
    if (expired_set.size() == leaves_.size()) {
        state_ = {std::nullopt, tree::empty_signed_root(new_epoch, k_, master_)};
    } else if (state_.tree) {
        auto rebuilt = tree::update_tree(*state_.tree, {}, expired, [&] {
            std::map<Pseudonym, std::uint64_t> f;
            for (const auto& [p, leaf] : leaves) f.emplace(p, leaf.frequency);
            return f;
        }(), new_epoch, master_);
        state_ = {std::move(rebuilt), {}};
        state_.signed_root = state_.tree->signed_root();
    } else {
        state_ = {std::nullopt, tree::empty_signed_root(new_epoch, k_, master_)};
    }
    for (const auto& p : expired_set) {
        leaves.erase(p);
        smoothed.erase(p);
        history_[p].back().until = new_epoch;
    }
    leaves_ = std::move(leaves);
    smoothed_ = std::move(smoothed);
    pending_counts_.clear();
    period_start_ = new_epoch;
    return snapshot();
}

void Ttp::publish(std::vector<tree::RevokedLeaf> leaves, std::uint64_t new_epoch) {
    if (leaves.empty()) {
        state_ = {std::nullopt, tree::empty_signed_root(new_epoch, k_, master_)};
        return;
    }
    auto t = tree::build_tree(std::move(leaves), k_, new_epoch, master_);
    auto root = t.signed_root();
    state_ = {std::move(t), std::move(root)};
}

std::uint64_t Ttp::frequency_of(const Pseudonym& p) const {
    auto it = leaves_.find(p);
    return it == leaves_.end() ? 0 : it->second.frequency;
}

bool Ttp::was_revoked_at(const Pseudonym& p, std::uint64_t at) const {
    auto it = history_.find(p);
    if (it == history_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [at](const Interval& iv) {
        return iv.from <= at && (!iv.until || at < *iv.until);
    });
}

ImpeachmentOutcome Ttp::handle_impeachment(const Impeachment& imp) {
    auto dismiss = [](DismissReason r) { return ImpeachmentOutcome{false, r, std::nullopt}; };
    const auto& ok = imp.ok;
    auto it = rsu_registry_.find(ok.rsu_id);
    if (it == rsu_registry_.end()) return dismiss(DismissReason::UnknownRsu);
    if (it->second == RsuStatus::Revoked) return dismiss(DismissReason::AlreadyRevoked);
    if (!ok.verify(master_.master_public)) return dismiss(DismissReason::BadOkSignature);
    // Evidence may be old; only authenticity matters here, not freshness.
    const auto verdict = tree::verify_proof(imp.contradiction, ok.pseudonym, master_.master_public, epoch(),
                                            std::numeric_limits<std::uint64_t>::max());
    if (!verdict) return dismiss(DismissReason::InvalidProof);
    if (ok.epoch < imp.contradiction.revocation_epoch) return dismiss(DismissReason::NoContradiction);
    // An honest 'OK' for a pseudonym that had already expired is not fraud.
    if (!was_revoked_at(ok.pseudonym, ok.epoch)) return dismiss(DismissReason::NotRevokedAtOkEpoch);

    it->second = RsuStatus::Revoked;
    return {true, DismissReason::UnknownRsu, RsuRevocationNotice{ok.rsu_id, epoch()}};
}

// --- Rsu ------------------------------------------------------------------

Rsu::Rsu(RsuId id, crypto::PseudonymPrivateKey key, Bytes ttp_master_public, const TreeUpdate& initial,
         RsuBehavior behavior)
    : id_(id), key_(std::move(key)), ttp_mpu_(std::move(ttp_master_public)), behavior_(behavior) {
    state_ = codec::decode_state(initial.snapshot);
    if (!state_.signed_root.verify(ttp_mpu_)) {
        throw Error(Errc::RootMismatch, "snapshot root signature does not verify");
    }
}

bool Rsu::apply_update(const TreeUpdate& update) {
    auto next = codec::decode_state(update.snapshot);
    if (!next.signed_root.verify(ttp_mpu_)) {
        throw Error(Errc::RootMismatch, "snapshot root signature does not verify");
    }
    if (next.epoch() <= state_.epoch()) {
        return false;
    }
    state_ = std::move(next);
    return true;
}

Response Rsu::handle_query(const Query& q) {
    if (behavior_ == RsuBehavior::Honest && state_.tree) {
        if (auto proof = tree::generate_proof(*state_.tree, q.pseudonym)) {
            ++counters_[q.pseudonym];
            ++proofs_since_report_;
            return ProofResponse{std::move(*proof)};
        }
    }
    return make_ok(key_, id_, q.pseudonym, state_.epoch());
}

FrequencyReport Rsu::report_frequencies(std::uint64_t epoch) {
    if (epoch != state_.epoch()) {
        throw Error(Errc::EpochMismatch, "rsu " + std::to_string(id_) + " is at epoch " +
                                             std::to_string(state_.epoch()));
    }
    FrequencyReport report{epoch, std::move(counters_)};
    counters_.clear();
    proofs_since_report_ = 0;
    return report;
}

// --- Obu ------------------------------------------------------------------

Obu::Obu(ObuId id, std::vector<crypto::PseudonymPrivateKey> keys, Bytes ttp_master_public, unsigned trust_threshold,
         std::uint64_t max_root_age)
    : id_(id),
      keys_(std::move(keys)),
      ttp_mpu_(std::move(ttp_master_public)),
      threshold_(trust_threshold),
      max_root_age_(max_root_age) {
    if (trust_threshold < 1) {
        throw Error(Errc::InvalidConfig, "trust threshold must be at least 1");
    }
}

Decision Obu::check(const Pseudonym& p, bool rsu_reachable) const {
    if (revoked_.contains(p)) return Decision::Reject;
    if (reliable_.contains(p)) return Decision::Accept;
    return rsu_reachable ? Decision::MustQuery : Decision::AcceptProvisional;
}

ResponseOutcome Obu::process_response(const Response& resp, const Pseudonym& asked, std::uint64_t current_epoch) {
    return std::visit(Overloaded{
                          [&](const ProofResponse& r) { return on_proof(r, asked, current_epoch); },
                          [&](const OkResponse& ok) { return on_ok(ok, asked); },
                      },
                      resp);
}

ResponseOutcome Obu::on_proof(const ProofResponse& resp, const Pseudonym& asked, std::uint64_t current_epoch) {
    ResponseOutcome out;
    const auto& proof = resp.proof;
    if (!tree::verify_proof(proof, asked, ttp_mpu_, current_epoch, max_root_age_)) {
        ++rejected_proofs_;
        return out;
    }
    out.kind = ResponseOutcome::Kind::Revoked;

    std::set<RsuId> impeached;
    auto collect = [&](const std::vector<OkResponse>& oks) {
        for (const auto& ok : oks) {
            if (ok.epoch >= proof.revocation_epoch && !revoked_rsus_.contains(ok.rsu_id) &&
                impeached.insert(ok.rsu_id).second) {
                out.impeachments.push_back({ok, proof});
            }
        }
    };
    if (auto it = pending_.find(asked); it != pending_.end()) {
        collect(it->second);
        pending_.erase(it);
    }
    if (auto it = reliable_.find(asked); it != reliable_.end()) {
        collect(it->second.support);
        reliable_.erase(it);
    }
    revoked_.insert_or_assign(asked, proof);
    return out;
}

ResponseOutcome Obu::on_ok(const OkResponse& ok, const Pseudonym& asked) {
    ResponseOutcome out;
    if (ok.pseudonym != asked || revoked_rsus_.contains(ok.rsu_id)) {
        return out;
    }
    if (!ok.verify(ttp_mpu_)) {
        ++invalid_oks_;
        return out;
    }
    if (auto it = revoked_.find(asked); it != revoked_.end()) {
        // Already holding proof of revocation: the 'OK' itself is the fraud.
        out.kind = ResponseOutcome::Kind::Revoked;
        if (ok.epoch >= it->second.revocation_epoch) {
            out.impeachments.push_back({ok, it->second});
        }
        return out;
    }
    if (auto it = reliable_.find(asked); it != reliable_.end()) {
        it->second.support.push_back(ok);
        it->second.newest_epoch = std::max(it->second.newest_epoch, ok.epoch);
        out.kind = ResponseOutcome::Kind::Reliable;
        return out;
    }
    auto& oks = pending_[asked];
    oks.push_back(ok);
    if (distinct_rsus(oks) >= threshold_) {
        ReliableEntry entry;
        for (const auto& o : oks) entry.newest_epoch = std::max(entry.newest_epoch, o.epoch);
        entry.support = std::move(oks);
        pending_.erase(asked);
        reliable_.insert_or_assign(asked, std::move(entry));
        out.kind = ResponseOutcome::Kind::Reliable;
    } else {
        out.kind = ResponseOutcome::Kind::Pending;
    }
    return out;
}

void Obu::advance_epoch(std::uint64_t epoch) {
    std::erase_if(reliable_, [epoch](const auto& kv) { return kv.second.newest_epoch < epoch; });
}

void Obu::on_rsu_revoked(const RsuRevocationNotice& notice) {
    revoked_rsus_.insert(notice.rsu_id);
    auto from_revoked = [&](const OkResponse& ok) { return ok.rsu_id == notice.rsu_id; };
    for (auto it = pending_.begin(); it != pending_.end();) {
        std::erase_if(it->second, from_revoked);
        it = it->second.empty() ? pending_.erase(it) : std::next(it);
    }
    for (auto it = reliable_.begin(); it != reliable_.end();) {
        auto& support = it->second.support;
        std::erase_if(support, from_revoked);
        if (distinct_rsus(support) < threshold_) {
            if (!support.empty()) pending_[it->first] = std::move(support);
            it = reliable_.erase(it);
        } else {
            ++it;
        }
    }
}

std::vector<Pseudonym> Obu::pending_pseudonyms() const {
    std::vector<Pseudonym> out;
    for (const auto& [p, oks] : pending_) out.push_back(p);
    return out;
}

const std::vector<OkResponse>* Obu::pending(const Pseudonym& p) const {
    auto it = pending_.find(p);
    return it == pending_.end() ? nullptr : &it->second;
}

bool Obu::pending_answered_by(const Pseudonym& p, RsuId rsu) const {
    const auto* oks = pending(p);
    return oks != nullptr &&
           std::any_of(oks->begin(), oks->end(), [rsu](const OkResponse& ok) { return ok.rsu_id == rsu; });
}

bool Obu::caches_disjoint() const {
    return std::none_of(revoked_.begin(), revoked_.end(), [this](const auto& kv) { return reliable_.contains(kv.first); });
}

} // namespace hkrt::protocol
