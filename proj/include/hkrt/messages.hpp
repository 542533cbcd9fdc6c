#pragma once

#include <cstdint>
#include <map>
#include <variant>

#include "hkrt/bytes.hpp"
#include "hkrt/crypto.hpp"
#include "hkrt/tree.hpp"

// Protocol messages exchanged by the TTP, RSUs and OBUs.
//
// Wire form: a one-byte variant tag followed by the fields in declaration
// order. Integers are fixed-width big-endian; byte strings (signatures,
// proofs, snapshots) carry a 4-byte big-endian length prefix.
//
//   0x01 Query               pseudonym[32]
//   0x02 ProofResponse       proof:blob (HPRF)
//   0x03 OkResponse          pseudonym[32] epoch:u64 rsu_id:u32 signature:blob
//   0x04 Impeachment         <OkResponse fields> contradiction:blob (HPRF)
//   0x05 TreeUpdate          snapshot:blob (HCRT)
//   0x06 FrequencyReport     epoch:u64 count:u32 count x (pseudonym[32] queries:u64)
//   0x07 RsuRevocationNotice rsu_id:u32 epoch:u64
//
// Frequency report entries are strictly ascending by pseudonym with nonzero
// counts, so each report has exactly one encoding (zero entries are dropped
// when encoding).
namespace hkrt::protocol {

using crypto::Pseudonym;
using RsuId = std::uint32_t;
using ObuId = std::uint32_t;

/// Verification identity of an RSU: a pseudonym derived from its id, so
/// OBUs can check 'OK' signatures with only the TTP master public key.
Pseudonym rsu_identity(RsuId id);

struct Query {
    Pseudonym pseudonym;
    friend bool operator==(const Query&, const Query&) = default;
};

struct ProofResponse {
    tree::RevocationProof proof;
    friend bool operator==(const ProofResponse&, const ProofResponse&) = default;
};

struct OkResponse {
    Pseudonym pseudonym;
    std::uint64_t epoch = 0;
    RsuId rsu_id = 0;
    crypto::IbsSignature rsu_signature;

    /// Bytes covered by rsu_signature.
    [[nodiscard]] Bytes signed_message() const;
    [[nodiscard]] bool verify(ByteView ttp_master_public) const noexcept;

    friend bool operator==(const OkResponse&, const OkResponse&) = default;
};

OkResponse make_ok(const crypto::PseudonymPrivateKey& rsu_key, RsuId rsu_id, const Pseudonym& p,
                   std::uint64_t epoch);

struct Impeachment {
    OkResponse ok;
    tree::RevocationProof contradiction;
    friend bool operator==(const Impeachment&, const Impeachment&) = default;
};

struct TreeUpdate {
    Bytes snapshot;
    friend bool operator==(const TreeUpdate&, const TreeUpdate&) = default;
};

struct FrequencyReport {
    std::uint64_t epoch = 0;
    std::map<Pseudonym, std::uint64_t> counters;

    [[nodiscard]] std::uint64_t total() const noexcept;
    friend bool operator==(const FrequencyReport&, const FrequencyReport&) = default;
};

struct RsuRevocationNotice {
    RsuId rsu_id = 0;
    std::uint64_t epoch = 0;
    friend bool operator==(const RsuRevocationNotice&, const RsuRevocationNotice&) = default;
};

using Message =
    std::variant<Query, ProofResponse, OkResponse, Impeachment, TreeUpdate, FrequencyReport, RsuRevocationNotice>;

/// Answer to a Query.
using Response = std::variant<ProofResponse, OkResponse>;

std::uint8_t message_tag(const Message& m) noexcept;

Bytes encode_message(const Message& m);
/// Throws hkrt::Error on malformed input (unknown tag reported as BadMagic).
Message decode_message(ByteView bytes);

} // namespace hkrt::protocol
