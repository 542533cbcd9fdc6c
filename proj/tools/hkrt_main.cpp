#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hkrt/codec.hpp"
#include "hkrt/crypto.hpp"
#include "hkrt/error.hpp"
#include "hkrt/sim.hpp"
#include "hkrt/tree.hpp"

namespace {

using namespace hkrt;

constexpr int kOk = 0;
constexpr int kLogicFailure = 1;
constexpr int kUsage = 2;

struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, std::string message) { throw Failure{code, std::move(message)}; }

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kUsage, "cannot read " + path);
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::string read_text(const std::string& path) {
    const auto b = read_file(path);
    return std::string(b.begin(), b.end());
}

// Writes a sibling temp file and renames it into place.
void write_file(const std::string& path, ByteView data) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(kUsage, "cannot write " + path);
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out) {
            std::filesystem::remove(tmp);
            fail(kUsage, "cannot write " + path);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        fail(kUsage, "cannot write " + path + ": " + ec.message());
    }
}

void write_text(const std::string& path, const std::string& text) {
    write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

crypto::Pseudonym parse_pseudonym(const std::string& hex) {
    try {
        return crypto::Pseudonym::from_hex(hex);
    } catch (const Error& e) {
        fail(kUsage, "bad pseudonym '" + hex + "': " + e.what());
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::vector<tree::RevokedLeaf> read_leaves(const std::string& path) {
    std::istringstream in(read_text(path));
    std::vector<tree::RevokedLeaf> leaves;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        const auto row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        for (std::size_t comma; (comma = row.find(',', start)) != std::string_view::npos; start = comma + 1) {
            fields.push_back(trim(row.substr(start, comma - start)));
        }
        fields.push_back(trim(row.substr(start)));
        const auto where = path + ":" + std::to_string(lineno) + ": ";
        if (fields.size() != 3) fail(kUsage, where + "expected 3 fields, got " + std::to_string(fields.size()));
        tree::RevokedLeaf leaf;
        try {
            leaf.pseudonym = crypto::Pseudonym::from_hex(fields[0]);
        } catch (const Error& e) {
            fail(kUsage, where + "bad pseudonym: " + e.what());
        }
        const auto epoch = parse_u64(fields[1]);
        const auto freq = parse_u64(fields[2]);
        if (!epoch) fail(kUsage, where + "bad revocation epoch '" + std::string(fields[1]) + "'");
        if (!freq) fail(kUsage, where + "bad frequency '" + std::string(fields[2]) + "'");
        leaf.revocation_epoch = *epoch;
        leaf.frequency = *freq;
        leaves.push_back(leaf);
    }
    return leaves;
}

crypto::Backend backend_from(const std::string& name) {
    try {
        return crypto::parse_backend(name);
    } catch (const Error& e) {
        fail(kUsage, e.what());
    }
}

// --- build ----------------------------------------------------------------

struct BuildArgs {
    std::string leaves;
    unsigned k = 0;
    std::uint64_t epoch = 0;
    std::uint64_t seed = 0;
    std::string backend = "ed25519";
    std::string out;
    std::string mpu_out;
};

int cmd_build(const BuildArgs& a) {
    auto leaves = read_leaves(a.leaves);
    const auto master = crypto::setup(crypto::seed_from_u64(a.seed), backend_from(a.backend));
    const auto t = tree::build_tree(std::move(leaves), a.k, a.epoch, master);
    write_file(a.out, codec::encode_tree(t));
    if (!a.mpu_out.empty()) write_file(a.mpu_out, master.master_public);
    std::cout << "root\t" << to_hex(t.root_digest()) << '\n'
              << "leaves\t" << t.leaf_count() << '\n'
              << "depth\t" << t.depth() << '\n'
              << "weighted_path_length\t" << tree::weighted_path_length(t) << '\n';
    return kOk;
}

// --- prove / verify -------------------------------------------------------

int cmd_prove(const std::string& tree_file, const std::string& pseudonym, const std::string& out) {
    const auto p = parse_pseudonym(pseudonym);
    const auto t = codec::decode_tree(read_file(tree_file));
    const auto proof = tree::generate_proof(t, p);
    if (!proof) fail(kLogicFailure, "not revoked");
    write_file(out, codec::encode_proof(*proof));
    std::cout << "path\t" << proof->path.label() << '\n' << "depth\t" << proof->path.depth() << '\n';
    return kOk;
}

struct VerifyArgs {
    std::string proof;
    std::string pseudonym;
    std::string mpu_file;
    std::uint64_t current_epoch = 0;
    std::uint64_t max_age = 1;
    std::optional<std::uint64_t> seed;
};

int cmd_verify(const VerifyArgs& a) {
    const auto p = parse_pseudonym(a.pseudonym);
    const auto mpu = read_file(a.mpu_file);
    const auto bytes = read_file(a.proof);
    if (a.seed) {
        // The test backend verifies through the key generator's secret.
        crypto::setup(crypto::seed_from_u64(*a.seed), crypto::Backend::Test);
    }
    tree::RevocationProof proof;
    try {
        proof = codec::decode_proof(bytes);
    } catch (const Error& e) {
        fail(kLogicFailure, std::string("reject: malformed (") + e.what() + ")");
    }
    const auto verdict = tree::verify_proof(proof, p, mpu, a.current_epoch, a.max_age);
    if (!verdict) fail(kLogicFailure, "reject: " + std::string(tree::reject_reason_name(verdict.reason)));
    std::cout << "accept\n";
    return kOk;
}

// --- simulate / bench -----------------------------------------------------

struct SimArgs {
    std::string config_file;
    std::string report_out;
    std::string series_out;
    std::string format = "text";
};

void add_sim_flags(CLI::App* cmd, sim::SimConfig& cfg, std::vector<std::string>& set_flags) {
    auto opt = [&](const std::string& name, auto& field, const std::string& help) {
        return cmd->add_option(name, field, help)->each(
            [&set_flags, name](const std::string&) { set_flags.push_back(name); });
    };
    opt("--seed", cfg.seed, "RNG seed");
    opt("--k", cfg.k, "tree arity");
    opt("--num-rsus", cfg.num_rsus, "number of RSUs");
    opt("--num-obus", cfg.num_obus, "number of active OBUs");
    opt("--num-revoked", cfg.num_revoked, "number of revoked pseudonyms");
    opt("--epochs", cfg.epochs, "simulated epochs");
    opt("--queries-per-epoch", cfg.queries_per_epoch, "queries per epoch");
    opt("--zipf", cfg.zipf_exponent, "Zipf exponent s");
    opt("--public-fraction", cfg.public_vehicle_fraction, "fraction of public vehicles");
    opt("--public-multiplier", cfg.public_query_multiplier, "query multiplier for public vehicles");
    opt("--trust-threshold", cfg.trust_threshold, "distinct RSU 'OK's needed");
    opt("--cheaters", cfg.cheater_rsu_ids, "cheating RSU ids")->delimiter(',');
    opt("--max-root-age", cfg.max_root_age, "accepted root age in epochs");
    opt("--pseudonyms-per-vehicle", cfg.pseudonyms_per_vehicle, "pseudonyms per vehicle");
    opt("--rounds-per-epoch", cfg.rounds_per_epoch, "rounds per epoch");
    opt("--ewma-alpha", cfg.ewma_alpha, "frequency smoothing factor");
    opt("--reachability", cfg.rsu_reachability, "probability an RSU is in range");
    cmd->add_flag("--assert-invariants", cfg.assert_invariants, "check protocol invariants after every event");
}

sim::SimConfig resolve_config(const SimArgs& a, const sim::SimConfig& flags, const std::vector<std::string>& set,
                              const std::string& backend) {
    sim::SimConfig cfg = a.config_file.empty() ? sim::SimConfig{} : sim::SimConfig::from_json(read_text(a.config_file));
    auto has = [&](const char* n) { return std::find(set.begin(), set.end(), n) != set.end(); };
    if (has("--seed")) cfg.seed = flags.seed;
    if (has("--k")) cfg.k = flags.k;
    if (has("--num-rsus")) cfg.num_rsus = flags.num_rsus;
    if (has("--num-obus")) cfg.num_obus = flags.num_obus;
    if (has("--num-revoked")) cfg.num_revoked = flags.num_revoked;
    if (has("--epochs")) cfg.epochs = flags.epochs;
    if (has("--queries-per-epoch")) cfg.queries_per_epoch = flags.queries_per_epoch;
    if (has("--zipf")) cfg.zipf_exponent = flags.zipf_exponent;
    if (has("--public-fraction")) cfg.public_vehicle_fraction = flags.public_vehicle_fraction;
    if (has("--public-multiplier")) cfg.public_query_multiplier = flags.public_query_multiplier;
    if (has("--trust-threshold")) cfg.trust_threshold = flags.trust_threshold;
    if (has("--cheaters")) cfg.cheater_rsu_ids = flags.cheater_rsu_ids;
    if (has("--max-root-age")) cfg.max_root_age = flags.max_root_age;
    if (has("--pseudonyms-per-vehicle")) cfg.pseudonyms_per_vehicle = flags.pseudonyms_per_vehicle;
    if (has("--rounds-per-epoch")) cfg.rounds_per_epoch = flags.rounds_per_epoch;
    if (has("--ewma-alpha")) cfg.ewma_alpha = flags.ewma_alpha;
    if (has("--reachability")) cfg.rsu_reachability = flags.rsu_reachability;
    if (flags.assert_invariants) cfg.assert_invariants = true;
    if (!backend.empty()) cfg.backend = backend_from(backend);
    cfg.validate();
    return cfg;
}

int cmd_simulate(const SimArgs& a, const sim::SimConfig& cfg) {
    const auto report = sim::run_simulation(cfg);
    const auto text = a.format == "json" ? report.to_json() : report.to_text();
    if (a.report_out.empty()) {
        std::cout << text;
    } else {
        write_text(a.report_out, text);
    }
    if (!a.series_out.empty()) write_text(a.series_out, report.series_csv());
    return kOk;
}

struct BenchArgs {
    std::vector<unsigned> ks{2, 3, 4, 5};
    std::vector<double> zipfs{0.0, 1.2};
    std::string out;
};

int cmd_bench(BenchArgs a, sim::SimConfig base) {
    std::sort(a.ks.begin(), a.ks.end());
    a.ks.erase(std::unique(a.ks.begin(), a.ks.end()), a.ks.end());
    std::sort(a.zipfs.begin(), a.zipfs.end());
    a.zipfs.erase(std::unique(a.zipfs.begin(), a.zipfs.end()), a.zipfs.end());
    for (auto k : a.ks) {
        auto probe = base;
        probe.k = k;
        probe.validate();
    }
    for (auto s : a.zipfs) {
        auto probe = base;
        probe.zipf_exponent = s;
        probe.validate();
    }

    std::string csv = "k,zipf_exponent,huffman_mean_depth,baseline_mean_depth,depth_ratio,proof_bytes_mean,"
                      "baseline_proof_bytes_mean,proof_responses\n";
    for (auto k : a.ks) {
        for (auto s : a.zipfs) {
            auto cfg = base;
            cfg.k = k;
            cfg.zipf_exponent = s;
            const auto r = sim::run_simulation(cfg);
            csv += std::to_string(k) + ',' + sim::format_double(s, 3) + ',' +
                   sim::format_double(r.weighted_mean_proof_depth) + ',' +
                   sim::format_double(r.baseline_mean_proof_depth) + ',' + sim::format_double(r.depth_ratio) + ',' +
                   sim::format_double(r.proof_bytes_mean) + ',' + sim::format_double(r.baseline_proof_bytes_mean) +
                   ',' + std::to_string(r.proof_responses) + '\n';
        }
    }
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        write_text(a.out, csv);
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-ordered k-ary revocation trees"};
    app.require_subcommand(1);

    BuildArgs build;
    auto* b = app.add_subcommand("build", "build and sign a revocation tree from a leaves CSV");
    b->add_option("leaves", build.leaves, "CSV rows: pseudonym-hex, revocation_epoch, frequency")->required();
    b->add_option("--k", build.k, "arity")->required()->check(CLI::Range(2, 255));
    b->add_option("--epoch", build.epoch, "tree epoch");
    b->add_option("--seed", build.seed, "key generator seed");
    b->add_option("--backend", build.backend, "signature backend (ed25519 or test)");
    b->add_option("--out", build.out, "HCRT snapshot output")->required();
    b->add_option("--mpu-out", build.mpu_out, "write the master public key here");

    std::string tree_file, prove_pseudonym, prove_out;
    auto* pr = app.add_subcommand("prove", "write a revocation proof for a pseudonym");
    pr->add_option("tree", tree_file, "HCRT snapshot")->required();
    pr->add_option("--pseudonym", prove_pseudonym, "64 hex characters")->required();
    pr->add_option("--out", prove_out, "HPRF proof output")->required();

    VerifyArgs verify;
    auto* v = app.add_subcommand("verify", "check a revocation proof");
    v->add_option("proof", verify.proof, "HPRF proof")->required();
    v->add_option("--pseudonym", verify.pseudonym, "64 hex characters")->required();
    v->add_option("--mpu-file", verify.mpu_file, "master public key")->required();
    v->add_option("--current-epoch", verify.current_epoch, "verifier's epoch")->required();
    v->add_option("--max-age", verify.max_age, "accepted root age in epochs");
    v->add_option("--seed", verify.seed, "key generator seed (test backend only)");

    SimArgs sim_args;
    sim::SimConfig sim_flags;
    std::vector<std::string> sim_set;
    std::string sim_backend;
    auto* s = app.add_subcommand("simulate", "run the seeded network simulation");
    s->add_option("--config-file", sim_args.config_file, "JSON config; flags override its values");
    s->add_option("--report-out", sim_args.report_out, "metrics report output (stdout if omitted)");
    s->add_option("--series-out", sim_args.series_out, "per-epoch CSV output");
    s->add_option("--format", sim_args.format, "report format")->check(CLI::IsMember({"text", "json"}));
    s->add_option("--backend", sim_backend, "signature backend (test or ed25519)");
    add_sim_flags(s, sim_flags, sim_set);

    BenchArgs bench;
    SimArgs bench_sim;
    sim::SimConfig bench_flags;
    std::vector<std::string> bench_set;
    std::string bench_backend;
    auto* be = app.add_subcommand("bench", "sweep arity and Zipf exponent");
    be->add_option("--k-list", bench.ks, "arities")->delimiter(',')->check(CLI::Range(2, 255));
    be->add_option("--zipf-list", bench.zipfs, "Zipf exponents")->delimiter(',');
    be->add_option("--out", bench.out, "CSV output (stdout if omitted)");
    be->add_option("--config-file", bench_sim.config_file, "JSON base config");
    be->add_option("--backend", bench_backend, "signature backend (test or ed25519)");
    add_sim_flags(be, bench_flags, bench_set);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*b) return cmd_build(build);
        if (*pr) return cmd_prove(tree_file, prove_pseudonym, prove_out);
        if (*v) return cmd_verify(verify);
        if (*s) return cmd_simulate(sim_args, resolve_config(sim_args, sim_flags, sim_set, sim_backend));
        if (*be) return cmd_bench(bench, resolve_config(bench_sim, bench_flags, bench_set, bench_backend));
    } catch (const Failure& f) {
        std::cerr << "hkrt: " << f.message << '\n';
        return f.code;
    } catch (const Error& e) {
        std::cerr << "hkrt: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "hkrt: " << e.what() << '\n';
        return kLogicFailure;
    }
    return kUsage;
}
