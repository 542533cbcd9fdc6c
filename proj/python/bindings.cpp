#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hkrt/codec.hpp"
#include "hkrt/crypto.hpp"
#include "hkrt/error.hpp"
#include "hkrt/sim.hpp"
#include "hkrt/tree.hpp"

namespace py = pybind11;
using namespace hkrt;

namespace {

py::bytes to_py(ByteView b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_py(const py::bytes& b) {
    const std::string_view s = b;
    return Bytes(s.begin(), s.end());
}

crypto::Pseudonym pseudonym_arg(const py::bytes& b) { return crypto::Pseudonym::from_bytes(from_py(b)); }

std::vector<tree::RevokedLeaf> leaves_arg(const std::vector<std::tuple<py::bytes, std::uint64_t, std::uint64_t>>& rows) {
    std::vector<tree::RevokedLeaf> out;
    out.reserve(rows.size());
    for (const auto& [p, epoch, freq] : rows) out.push_back({pseudonym_arg(p), epoch, freq});
    return out;
}

py::object path_or_none(const std::optional<tree::TreePath>& path) {
    if (!path) return py::none();
    return py::cast(std::vector<int>(path->branches.begin(), path->branches.end()));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Frequency-ordered k-ary revocation trees";

    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    // --- crypto ---
    py::class_<crypto::MasterKeys>(m, "MasterKeys")
        .def_property_readonly("master_public", [](const crypto::MasterKeys& k) { return to_py(k.master_public); })
        .def_property_readonly("backend",
                               [](const crypto::MasterKeys& k) { return std::string(crypto::backend_name(k.backend())); });

    py::class_<crypto::PseudonymPrivateKey>(m, "PseudonymPrivateKey")
        .def_property_readonly("pseudonym", [](const crypto::PseudonymPrivateKey& k) { return to_py(k.pseudonym.id); });

    m.def(
        "setup",
        [](std::uint64_t seed, const std::string& backend) {
            return crypto::setup(crypto::seed_from_u64(seed), crypto::parse_backend(backend));
        },
        py::arg("seed"), py::arg("backend") = "test");
    m.def(
        "extract", [](const crypto::MasterKeys& master, const py::bytes& p) { return crypto::extract(master, pseudonym_arg(p)); },
        py::arg("master"), py::arg("pseudonym"));
    m.def(
        "sign",
        [](const crypto::PseudonymPrivateKey& key, const py::bytes& msg) {
            return to_py(crypto::sign(key, from_py(msg)).bytes);
        },
        py::arg("key"), py::arg("message"));
    m.def(
        "verify",
        [](const py::bytes& mpu, const py::bytes& p, const py::bytes& msg, const py::bytes& sig) {
            return crypto::verify(from_py(mpu), pseudonym_arg(p), from_py(msg), crypto::IbsSignature{from_py(sig)});
        },
        py::arg("master_public"), py::arg("pseudonym"), py::arg("message"), py::arg("signature"));
    m.def(
        "pseudonym_from_hex", [](const std::string& hex) { return to_py(crypto::Pseudonym::from_hex(hex).id); },
        py::arg("hex"));

    // --- tree ---
    py::class_<tree::RevocationProof>(m, "RevocationProof")
        .def_property_readonly("pseudonym", [](const tree::RevocationProof& p) { return to_py(p.pseudonym.id); })
        .def_readonly("revocation_epoch", &tree::RevocationProof::revocation_epoch)
        .def_property_readonly("path",
                               [](const tree::RevocationProof& p) {
                                   return std::vector<int>(p.path.branches.begin(), p.path.branches.end());
                               })
        .def_property_readonly("label", [](const tree::RevocationProof& p) { return p.path.label(); })
        .def_property_readonly("depth", [](const tree::RevocationProof& p) { return p.path.depth(); })
        .def_property_readonly("root_epoch", [](const tree::RevocationProof& p) { return p.signed_root.epoch; })
        .def("encode", [](const tree::RevocationProof& p) { return to_py(codec::encode_proof(p)); });

    py::class_<tree::RevocationTree>(m, "RevocationTree")
        .def_property_readonly("k", &tree::RevocationTree::k)
        .def_property_readonly("epoch", &tree::RevocationTree::epoch)
        .def_property_readonly("leaf_count", &tree::RevocationTree::leaf_count)
        .def_property_readonly("dummy_count", &tree::RevocationTree::dummy_count)
        .def_property_readonly("depth", &tree::RevocationTree::depth)
        .def_property_readonly("root_digest", [](const tree::RevocationTree& t) { return to_py(t.root_digest()); })
        .def_property_readonly("leaves",
                               [](const tree::RevocationTree& t) {
                                   py::list out;
                                   for (const auto& l : t.leaves()) {
                                       out.append(py::make_tuple(to_py(l.pseudonym.id), l.revocation_epoch, l.frequency));
                                   }
                                   return out;
                               })
        .def("lookup_path", [](const tree::RevocationTree& t, const py::bytes& p) { return path_or_none(t.lookup_path(pseudonym_arg(p))); })
        .def("weighted_path_length", [](const tree::RevocationTree& t) { return tree::weighted_path_length(t); })
        .def("generate_proof",
             [](const tree::RevocationTree& t, const py::bytes& p) -> py::object {
                 auto proof = tree::generate_proof(t, pseudonym_arg(p));
                 if (!proof) return py::none();
                 return py::cast(std::move(*proof));
             })
        .def("encode", [](const tree::RevocationTree& t) { return to_py(codec::encode_tree(t)); });

    m.def(
        "build_tree",
        [](const std::vector<std::tuple<py::bytes, std::uint64_t, std::uint64_t>>& leaves, unsigned k,
           std::uint64_t epoch, const crypto::MasterKeys& master) {
            return tree::build_tree(leaves_arg(leaves), k, epoch, master);
        },
        py::arg("leaves"), py::arg("k"), py::arg("epoch"), py::arg("master"),
        "leaves: sequence of (pseudonym bytes, revocation_epoch, frequency)");
    m.def("decode_tree", [](const py::bytes& b) { return codec::decode_tree(from_py(b)); }, py::arg("data"));
    m.def("decode_proof", [](const py::bytes& b) { return codec::decode_proof(from_py(b)); }, py::arg("data"));
    m.def(
        "verify_proof",
        [](const tree::RevocationProof& proof, const py::bytes& p, const py::bytes& mpu, std::uint64_t current_epoch,
           std::uint64_t max_age) {
            const auto v = tree::verify_proof(proof, pseudonym_arg(p), from_py(mpu), current_epoch, max_age);
            return py::make_tuple(v.accepted,
                                  v.accepted ? py::object(py::none()) : py::str(std::string(tree::reject_reason_name(v.reason))));
        },
        py::arg("proof"), py::arg("pseudonym"), py::arg("master_public"), py::arg("current_epoch"),
        py::arg("max_age") = 1, "Returns (accepted, reject reason or None).");

    // --- sim ---
    py::class_<sim::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("seed", &sim::SimConfig::seed)
        .def_readwrite("k", &sim::SimConfig::k)
        .def_readwrite("num_rsus", &sim::SimConfig::num_rsus)
        .def_readwrite("num_obus", &sim::SimConfig::num_obus)
        .def_readwrite("num_revoked", &sim::SimConfig::num_revoked)
        .def_readwrite("epochs", &sim::SimConfig::epochs)
        .def_readwrite("queries_per_epoch", &sim::SimConfig::queries_per_epoch)
        .def_readwrite("zipf_exponent", &sim::SimConfig::zipf_exponent)
        .def_readwrite("public_vehicle_fraction", &sim::SimConfig::public_vehicle_fraction)
        .def_readwrite("public_query_multiplier", &sim::SimConfig::public_query_multiplier)
        .def_readwrite("trust_threshold", &sim::SimConfig::trust_threshold)
        .def_readwrite("cheater_rsu_ids", &sim::SimConfig::cheater_rsu_ids)
        .def_readwrite("max_root_age", &sim::SimConfig::max_root_age)
        .def_readwrite("pseudonyms_per_vehicle", &sim::SimConfig::pseudonyms_per_vehicle)
        .def_readwrite("rounds_per_epoch", &sim::SimConfig::rounds_per_epoch)
        .def_readwrite("ewma_alpha", &sim::SimConfig::ewma_alpha)
        .def_readwrite("rsu_reachability", &sim::SimConfig::rsu_reachability)
        .def_readwrite("assert_invariants", &sim::SimConfig::assert_invariants)
        .def("validate", &sim::SimConfig::validate)
        .def("to_json", &sim::SimConfig::to_json)
        .def_static("from_json", &sim::SimConfig::from_json, py::arg("text"));

    py::class_<sim::MetricsReport>(m, "MetricsReport")
        .def_readonly("queries", &sim::MetricsReport::queries)
        .def_readonly("proof_responses", &sim::MetricsReport::proof_responses)
        .def_readonly("weighted_mean_proof_depth", &sim::MetricsReport::weighted_mean_proof_depth)
        .def_readonly("baseline_mean_proof_depth", &sim::MetricsReport::baseline_mean_proof_depth)
        .def_readonly("depth_ratio", &sim::MetricsReport::depth_ratio)
        .def_readonly("proof_bytes_mean", &sim::MetricsReport::proof_bytes_mean)
        .def_readonly("impeachments_emitted", &sim::MetricsReport::impeachments_emitted)
        .def_readonly("impeachments_accepted", &sim::MetricsReport::impeachments_accepted)
        .def_readonly("impeachments_dismissed", &sim::MetricsReport::impeachments_dismissed)
        .def_readonly("cheaters_revoked", &sim::MetricsReport::cheaters_revoked)
        .def_readonly("provisional_accepts", &sim::MetricsReport::provisional_accepts)
        .def("to_text", &sim::MetricsReport::to_text)
        .def("to_json", &sim::MetricsReport::to_json)
        .def("series_csv", &sim::MetricsReport::series_csv);

    m.def("run_simulation", &sim::run_simulation, py::arg("config"));
}
