#include "hkrt/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hkrt/codec.hpp"
#include "hkrt/error.hpp"
#include "hkrt/hash.hpp"
#include "hkrt/protocol.hpp"
#include "hkrt/tree.hpp"

namespace hkrt::sim {

namespace {

using json = nlohmann::ordered_json;
__extension__ using u128 = unsigned __int128;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent streams for population, workload and delivery order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

[[noreturn]] void bad_config(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

void invariant(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("invariant violated: ") + what);
}

} // namespace

// --- SimConfig ------------------------------------------------------------

void SimConfig::validate() const {
    if (k < 2 || k > tree::kMaxArity) bad_config("k must be in [2, 255]");
    if (num_rsus < 1) bad_config("num_rsus must be at least 1");
    if (num_obus < 1) bad_config("num_obus must be at least 1");
    if (num_revoked < 1) bad_config("num_revoked must be at least 1");
    if (epochs < 1) bad_config("epochs must be at least 1");
    if (queries_per_epoch < 1) bad_config("queries_per_epoch must be at least 1");
    if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent)) bad_config("zipf_exponent must be finite and >= 0");
    if (!(public_vehicle_fraction >= 0.0 && public_vehicle_fraction <= 1.0)) {
        bad_config("public_vehicle_fraction must be in [0, 1]");
    }
    if (!(public_query_multiplier >= 1.0) || !std::isfinite(public_query_multiplier)) {
        bad_config("public_query_multiplier must be finite and >= 1");
    }
    if (trust_threshold < 1) bad_config("trust_threshold must be at least 1");
    std::set<RsuId> seen;
    for (auto id : cheater_rsu_ids) {
        if (id >= num_rsus) bad_config("cheater rsu id " + std::to_string(id) + " out of range");
        if (!seen.insert(id).second) bad_config("duplicate cheater rsu id " + std::to_string(id));
    }
    if (pseudonyms_per_vehicle < 1) bad_config("pseudonyms_per_vehicle must be at least 1");
    if (rounds_per_epoch < 1) bad_config("rounds_per_epoch must be at least 1");
    if (!(ewma_alpha > 0.0 && ewma_alpha <= 1.0)) bad_config("ewma_alpha must be in (0, 1]");
    if (!(rsu_reachability >= 0.0 && rsu_reachability <= 1.0)) bad_config("rsu_reachability must be in [0, 1]");
    const auto total = std::uint64_t{num_obus} * pseudonyms_per_vehicle + num_revoked;
    if (total > (1ULL << 31)) bad_config("population too large");
}

std::string SimConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["k"] = k;
    j["num_rsus"] = num_rsus;
    j["num_obus"] = num_obus;
    j["num_revoked"] = num_revoked;
    j["epochs"] = epochs;
    j["queries_per_epoch"] = queries_per_epoch;
    j["zipf_exponent"] = zipf_exponent;
    j["public_vehicle_fraction"] = public_vehicle_fraction;
    j["public_query_multiplier"] = public_query_multiplier;
    j["trust_threshold"] = trust_threshold;
    j["cheater_rsu_ids"] = cheater_rsu_ids;
    j["max_root_age"] = max_root_age;
    j["pseudonyms_per_vehicle"] = pseudonyms_per_vehicle;
    j["rounds_per_epoch"] = rounds_per_epoch;
    j["ewma_alpha"] = ewma_alpha;
    j["rsu_reachability"] = rsu_reachability;
    j["backend"] = std::string(crypto::backend_name(backend));
    j["assert_invariants"] = assert_invariants;
    return j.dump(2) + "\n";
}

SimConfig SimConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad_config(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_config("config must be a JSON object");

    static const std::set<std::string> real_keys{"zipf_exponent", "public_vehicle_fraction",
                                                 "public_query_multiplier", "ewma_alpha", "rsu_reachability"};
    SimConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (value.is_number_float() && !real_keys.contains(key)) bad_config("'" + key + "' must be an integer");
        if (value.is_number_integer() && !value.is_number_unsigned()) bad_config("'" + key + "' must not be negative");
        try {
            if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "k") cfg.k = value.get<unsigned>();
            else if (key == "num_rsus") cfg.num_rsus = value.get<std::uint32_t>();
            else if (key == "num_obus") cfg.num_obus = value.get<std::uint32_t>();
            else if (key == "num_revoked") cfg.num_revoked = value.get<std::uint32_t>();
            else if (key == "epochs") cfg.epochs = value.get<std::uint32_t>();
            else if (key == "queries_per_epoch") cfg.queries_per_epoch = value.get<std::uint32_t>();
            else if (key == "zipf_exponent") cfg.zipf_exponent = value.get<double>();
            else if (key == "public_vehicle_fraction") cfg.public_vehicle_fraction = value.get<double>();
            else if (key == "public_query_multiplier") cfg.public_query_multiplier = value.get<double>();
            else if (key == "trust_threshold") cfg.trust_threshold = value.get<unsigned>();
            else if (key == "cheater_rsu_ids") cfg.cheater_rsu_ids = value.get<std::vector<RsuId>>();
            else if (key == "max_root_age") cfg.max_root_age = value.get<std::uint64_t>();
            else if (key == "pseudonyms_per_vehicle") cfg.pseudonyms_per_vehicle = value.get<std::uint32_t>();
            else if (key == "rounds_per_epoch") cfg.rounds_per_epoch = value.get<std::uint32_t>();
            else if (key == "ewma_alpha") cfg.ewma_alpha = value.get<double>();
            else if (key == "rsu_reachability") cfg.rsu_reachability = value.get<double>();
            else if (key == "backend") cfg.backend = crypto::parse_backend(value.get<std::string>());
            else if (key == "assert_invariants") cfg.assert_invariants = value.get<bool>();
            else bad_config("unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            bad_config("bad value for '" + key + "': " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

// --- Workload -------------------------------------------------------------

std::uint64_t Rng::below(std::uint64_t n) {
    // Lemire's nearly divisionless method.
    u128 m = static_cast<u128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<u128>(engine_()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Population::active_count() const {
    return static_cast<std::size_t>(std::count_if(vehicles.begin(), vehicles.end(), [](const Vehicle& v) { return !v.revoked; }));
}

Population make_population(const SimConfig& cfg) {
    cfg.validate();
    Rng rng(stream_seed(cfg.seed, 1));
    Population pop;
    auto add_vehicle = [&](std::uint32_t n, bool revoked) {
        Vehicle v;
        v.revoked = revoked;
        v.is_public = rng.unit() < cfg.public_vehicle_fraction;
        const auto vid = static_cast<std::uint32_t>(pop.vehicles.size());
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::uint32_t>(pop.pseudonyms.size());
            const auto d = sha3_256(ByteWriter().tag("hkrt/sim/pseudonym").u64(cfg.seed).u64(idx).bytes());
            pop.pseudonyms.push_back(Pseudonym::from_bytes(d));
            pop.owner.push_back(vid);
            v.pseudonyms.push_back(idx);
        }
        pop.vehicles.push_back(std::move(v));
    };
    for (std::uint32_t i = 0; i < cfg.num_obus; ++i) add_vehicle(cfg.pseudonyms_per_vehicle, false);
    for (std::uint32_t left = cfg.num_revoked; left > 0;) {
        const auto n = std::min(left, cfg.pseudonyms_per_vehicle);
        add_vehicle(n, true);
        left -= n;
    }

    pop.rank.resize(pop.pseudonyms.size());
    for (std::size_t i = 0; i < pop.rank.size(); ++i) pop.rank[i] = static_cast<std::uint32_t>(i + 1);
    for (std::size_t i = pop.rank.size(); i > 1; --i) {
        std::swap(pop.rank[i - 1], pop.rank[rng.below(i)]);
    }
    return pop;
}

std::vector<double> target_weights(const SimConfig& cfg, const Population& pop) {
    std::vector<double> w(pop.pseudonyms.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = cfg.zipf_exponent == 0.0 ? 1.0 : std::pow(static_cast<double>(pop.rank[i]), -cfg.zipf_exponent);
        if (pop.vehicles[pop.owner[i]].is_public) w[i] *= cfg.public_query_multiplier;
    }
    return w;
}

std::vector<QueryEvent> gen_workload(const SimConfig& cfg) { return gen_workload(cfg, make_population(cfg)); }

std::vector<QueryEvent> gen_workload(const SimConfig& cfg, const Population& pop) {
    cfg.validate();
    const auto weights = target_weights(cfg, pop);
    std::vector<double> cumulative(weights.size());
    double total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) cumulative[i] = total += weights[i];

    Rng rng(stream_seed(cfg.seed, 2));
    std::vector<QueryEvent> trace;
    trace.reserve(std::size_t{cfg.epochs} * cfg.queries_per_epoch);
    for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
        for (std::uint32_t q = 0; q < cfg.queries_per_epoch; ++q) {
            QueryEvent ev;
            ev.epoch = e;
            ev.round = static_cast<std::uint32_t>(std::uint64_t{q} * cfg.rounds_per_epoch / cfg.queries_per_epoch);
            ev.querier = static_cast<ObuId>(rng.below(cfg.num_obus));
            const auto x = rng.unit() * total;
            const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
            ev.target = static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative.begin(), weights.size() - 1));
            trace.push_back(ev);
        }
    }
    return trace;
}

unsigned balanced_depth(std::size_t t, unsigned k) {
    unsigned depth = 1;
    for (std::uint64_t capacity = k; capacity < t; capacity *= k) ++depth;
    return depth;
}

// --- Simulation -----------------------------------------------------------

namespace {

class Simulation {
public:
    explicit Simulation(const SimConfig& cfg)
        : cfg_(cfg),
          pop_(make_population(cfg)),
          trace_(gen_workload(cfg, pop_)),
          rng_(stream_seed(cfg.seed, 3)),
          ttp_(crypto::seed_from_u64(cfg.seed), cfg.k, cfg.ewma_alpha, cfg.backend) {}

    MetricsReport run();

private:
    void setup();
    void ask(ObuId obu, std::uint32_t target, protocol::Rsu& rsu);
    void deliver_impeachment(const protocol::Impeachment& imp);
    void close_epoch(std::uint32_t index);
    protocol::Rsu* route(ObuId obu);

    const SimConfig& cfg_;
    Population pop_;
    std::vector<QueryEvent> trace_;
    Rng rng_;
    protocol::Ttp ttp_;
    std::vector<std::unique_ptr<protocol::Obu>> obus_;
    std::vector<std::unique_ptr<protocol::Rsu>> rsus_;
    std::vector<RsuId> routing_;
    std::unordered_map<Pseudonym, std::uint32_t> index_of_;
    std::vector<std::uint64_t> rsu_proofs_; // per RSU, current epoch
    std::size_t offset_ = 0;
    unsigned baseline_depth_ = 1;

    MetricsReport m_;
    double depth_sum_ = 0, baseline_sum_ = 0, bytes_sum_ = 0, baseline_bytes_sum_ = 0;
    std::uint64_t epoch_proofs_ = 0, epoch_depth_sum_ = 0, epoch_impeachments_ = 0;
};

void Simulation::setup() {
    const Bytes mpu = ttp_.master_public();
    for (std::uint32_t i = 0; i < pop_.pseudonyms.size(); ++i) index_of_.emplace(pop_.pseudonyms[i], i);
    std::vector<ObuId> to_revoke;
    for (std::size_t v = 0; v < pop_.vehicles.size(); ++v) {
        const auto& vehicle = pop_.vehicles[v];
        std::vector<Pseudonym> ps;
        for (auto idx : vehicle.pseudonyms) ps.push_back(pop_.pseudonyms[idx]);
        auto keys = ttp_.register_obu(static_cast<ObuId>(v), ps);
        if (vehicle.revoked) {
            to_revoke.push_back(static_cast<ObuId>(v));
        } else {
            obus_.push_back(std::make_unique<protocol::Obu>(static_cast<ObuId>(v), std::move(keys), mpu,
                                                            cfg_.trust_threshold, cfg_.max_root_age));
        }
    }
    std::vector<crypto::PseudonymPrivateKey> rsu_keys;
    for (RsuId id = 0; id < cfg_.num_rsus; ++id) rsu_keys.push_back(ttp_.register_rsu(id));
    ttp_.revoke_obus(to_revoke);

    const std::set<RsuId> cheaters(cfg_.cheater_rsu_ids.begin(), cfg_.cheater_rsu_ids.end());
    const auto snapshot = ttp_.snapshot();
    for (RsuId id = 0; id < cfg_.num_rsus; ++id) {
        const auto behavior = cheaters.contains(id) ? protocol::RsuBehavior::Cheater : protocol::RsuBehavior::Honest;
        rsus_.push_back(std::make_unique<protocol::Rsu>(id, rsu_keys[id], mpu, snapshot, behavior));
        routing_.push_back(id);
    }
    rsu_proofs_.assign(cfg_.num_rsus, 0);
    baseline_depth_ = balanced_depth(ttp_.state().tree->leaf_count(), cfg_.k);
}

protocol::Rsu* Simulation::route(ObuId obu) {
    if (routing_.empty()) return nullptr;
    return rsus_[routing_[(obu + offset_) % routing_.size()]].get();
}

void Simulation::ask(ObuId obu, std::uint32_t target, protocol::Rsu& rsu) {
    const auto& p = pop_.pseudonyms[target];
    ++m_.rsu_queries;
    const auto resp = rsu.handle_query({p});
    if (const auto* pr = std::get_if<protocol::ProofResponse>(&resp)) {
        const auto depth = pr->proof.path.depth();
        const auto bytes = codec::encode_proof(pr->proof).size();
        const auto per_level = 1.0 + (cfg_.k - 1) * 32.0;
        ++m_.proof_responses;
        ++rsu_proofs_[rsu.id()];
        ++epoch_proofs_;
        epoch_depth_sum_ += depth;
        depth_sum_ += static_cast<double>(depth);
        baseline_sum_ += baseline_depth_;
        bytes_sum_ += static_cast<double>(bytes);
        baseline_bytes_sum_ += static_cast<double>(bytes) + (static_cast<double>(baseline_depth_) - depth) * per_level;
        if (cfg_.assert_invariants) {
            ++m_.invariant_checks;
            invariant(static_cast<bool>(tree::verify_proof(pr->proof, p, ttp_.master_public(), ttp_.epoch(), 0)),
                      "honest proof verifies against the current signed root");
        }
    } else {
        ++m_.ok_responses;
    }

    auto& o = *obus_[obu];
    const auto before_invalid = o.invalid_ok_count();
    const auto before_rejected = o.rejected_proof_count();
    auto outcome = o.process_response(resp, p, ttp_.epoch());
    m_.invalid_oks += o.invalid_ok_count() - before_invalid;
    m_.rejected_proofs += o.rejected_proof_count() - before_rejected;
    if (cfg_.assert_invariants) {
        ++m_.invariant_checks;
        invariant(o.caches_disjoint(), "revoked and reliable caches are disjoint");
    }
    for (const auto& imp : outcome.impeachments) deliver_impeachment(imp);
}

void Simulation::deliver_impeachment(const protocol::Impeachment& imp) {
    ++m_.impeachments_emitted;
    const auto out = ttp_.handle_impeachment(imp);
    if (!out.rsu_revoked) {
        ++m_.impeachments_dismissed;
        return;
    }
    ++m_.impeachments_accepted;
    ++epoch_impeachments_;
    const auto id = out.notice->rsu_id;
    if (rsus_[id]->behavior() == protocol::RsuBehavior::Cheater) {
        ++m_.cheaters_revoked;
        if (m_.first_cheater_revocation_epoch == 0) m_.first_cheater_revocation_epoch = ttp_.epoch();
    } else {
        ++m_.honest_rsus_revoked;
    }
    if (cfg_.assert_invariants) {
        ++m_.invariant_checks;
        invariant(rsus_[id]->behavior() == protocol::RsuBehavior::Cheater, "no honest RSU is impeached");
    }
    std::erase(routing_, id);
    for (auto& o : obus_) o->on_rsu_revoked(*out.notice);
}

void Simulation::close_epoch(std::uint32_t) {
    const auto& state = ttp_.state();
    EpochMetrics em;
    em.epoch = ttp_.epoch();
    em.leaf_count = state.tree ? state.tree->leaf_count() : 0;
    em.weighted_path_length = state.tree ? tree::weighted_path_length(*state.tree) : 0;
    em.proof_responses = epoch_proofs_;
    em.mean_proof_depth = epoch_proofs_ == 0 ? 0.0 : static_cast<double>(epoch_depth_sum_) / epoch_proofs_;
    em.baseline_depth = baseline_depth_;
    em.impeachments_accepted = epoch_impeachments_;
    m_.series.push_back(em);

    for (auto id : routing_) {
        auto& rsu = *rsus_[id];
        const auto report = rsu.report_frequencies(rsu.epoch());
        if (cfg_.assert_invariants) {
            ++m_.invariant_checks;
            invariant(report.total() == rsu_proofs_[id], "reported counts equal proofs issued");
        }
        ttp_.receive_report(id, report);
    }
    const auto update = ttp_.epoch_update({});
    for (auto id : routing_) rsus_[id]->apply_update(update);
    for (auto& o : obus_) o->advance_epoch(ttp_.epoch());

    std::fill(rsu_proofs_.begin(), rsu_proofs_.end(), 0);
    epoch_proofs_ = epoch_depth_sum_ = epoch_impeachments_ = 0;
    const auto& next = ttp_.state();
    baseline_depth_ = next.tree ? balanced_depth(next.tree->leaf_count(), cfg_.k) : 0;
}

MetricsReport Simulation::run() {
    setup();
    const bool always_reachable = cfg_.rsu_reachability >= 1.0;
    std::vector<char> reachable(obus_.size(), 1);
    auto it = trace_.begin();
    for (std::uint32_t e = 0; e < cfg_.epochs; ++e) {
        for (std::uint32_t r = 0; r < cfg_.rounds_per_epoch; ++r) {
            offset_ = routing_.empty() ? 0 : static_cast<std::size_t>(rng_.below(routing_.size()));
            if (!always_reachable) {
                for (auto& flag : reachable) flag = rng_.unit() < cfg_.rsu_reachability;
            }
            // Pending pseudonyms are asked again of RSUs that have not yet answered them.
            for (ObuId o = 0; o < obus_.size(); ++o) {
                if (!reachable[o]) continue;
                for (const auto& p : obus_[o]->pending_pseudonyms()) {
                    auto* rsu = route(o);
                    if (rsu == nullptr || obus_[o]->pending_answered_by(p, rsu->id())) continue;
                    ++m_.reasks;
                    ask(o, index_of_.at(p), *rsu);
                }
            }
            for (; it != trace_.end() && it->epoch == e && it->round == r; ++it) {
                ++m_.queries;
                auto* rsu = route(it->querier);
                const bool in_range = reachable[it->querier] && rsu != nullptr;
                switch (obus_[it->querier]->check(pop_.pseudonyms[it->target], in_range)) {
                    case protocol::Decision::Reject: ++m_.revoked_cache_hits; break;
                    case protocol::Decision::Accept: ++m_.reliable_cache_hits; break;
                    case protocol::Decision::AcceptProvisional: ++m_.provisional_accepts; break;
                    case protocol::Decision::MustQuery: ask(it->querier, it->target, *rsu); break;
                }
            }
        }
        close_epoch(e);
    }

    m_.final_epoch = ttp_.epoch();
    m_.final_leaf_count = ttp_.state().tree ? ttp_.state().tree->leaf_count() : 0;
    if (m_.proof_responses > 0) {
        const auto n = static_cast<double>(m_.proof_responses);
        m_.weighted_mean_proof_depth = depth_sum_ / n;
        m_.baseline_mean_proof_depth = baseline_sum_ / n;
        m_.depth_ratio = m_.weighted_mean_proof_depth / m_.baseline_mean_proof_depth;
        m_.proof_bytes_mean = bytes_sum_ / n;
        m_.baseline_proof_bytes_mean = baseline_bytes_sum_ / n;
    }
    return m_;
}

} // namespace

MetricsReport run_simulation(const SimConfig& cfg) {
    cfg.validate();
    return Simulation(cfg).run();
}

// --- Output ---------------------------------------------------------------

std::string format_double(double v, int precision) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

namespace {

template <class F>
void for_each_scalar(const MetricsReport& r, F&& f) {
    f("queries", r.queries);
    f("revoked_cache_hits", r.revoked_cache_hits);
    f("reliable_cache_hits", r.reliable_cache_hits);
    f("provisional_accepts", r.provisional_accepts);
    f("rsu_queries", r.rsu_queries);
    f("reasks", r.reasks);
    f("proof_responses", r.proof_responses);
    f("ok_responses", r.ok_responses);
    f("weighted_mean_proof_depth", r.weighted_mean_proof_depth);
    f("baseline_mean_proof_depth", r.baseline_mean_proof_depth);
    f("depth_ratio", r.depth_ratio);
    f("proof_bytes_mean", r.proof_bytes_mean);
    f("baseline_proof_bytes_mean", r.baseline_proof_bytes_mean);
    f("impeachments_emitted", r.impeachments_emitted);
    f("impeachments_accepted", r.impeachments_accepted);
    f("impeachments_dismissed", r.impeachments_dismissed);
    f("cheaters_revoked", r.cheaters_revoked);
    f("honest_rsus_revoked", r.honest_rsus_revoked);
    f("first_cheater_revocation_epoch", r.first_cheater_revocation_epoch);
    f("invalid_oks", r.invalid_oks);
    f("rejected_proofs", r.rejected_proofs);
    f("invariant_checks", r.invariant_checks);
    f("final_epoch", r.final_epoch);
    f("final_leaf_count", r.final_leaf_count);
}

std::string scalar_text(std::uint64_t v) { return std::to_string(v); }
std::string scalar_text(double v) { return format_double(v); }

} // namespace

std::string MetricsReport::to_text() const {
    std::string out;
    for_each_scalar(*this, [&](const char* name, auto v) {
        out += name;
        out += '\t';
        out += scalar_text(v);
        out += '\n';
    });
    return out;
}

std::string MetricsReport::to_json() const {
    json j;
    for_each_scalar(*this, [&](const char* name, auto v) {
        if constexpr (std::is_same_v<decltype(v), double>) {
            j[name] = json::parse(format_double(v));
        } else {
            j[name] = v;
        }
    });
    j["series"] = json::array();
    for (const auto& e : series) {
        j["series"].push_back({
            {"epoch", e.epoch},
            {"leaf_count", e.leaf_count},
            {"weighted_path_length", e.weighted_path_length},
            {"proof_responses", e.proof_responses},
            {"mean_proof_depth", json::parse(format_double(e.mean_proof_depth))},
            {"baseline_depth", e.baseline_depth},
            {"impeachments_accepted", e.impeachments_accepted},
        });
    }
    return j.dump(2) + "\n";
}

std::string MetricsReport::series_csv() const {
    std::string out =
        "epoch,leaf_count,weighted_path_length,proof_responses,mean_proof_depth,baseline_depth,impeachments_accepted\n";
    for (const auto& e : series) {
        out += std::to_string(e.epoch) + ',' + std::to_string(e.leaf_count) + ',' +
               std::to_string(e.weighted_path_length) + ',' + std::to_string(e.proof_responses) + ',' +
               format_double(e.mean_proof_depth) + ',' + std::to_string(e.baseline_depth) + ',' +
               std::to_string(e.impeachments_accepted) + '\n';
    }
    return out;
}

} // namespace hkrt::sim
