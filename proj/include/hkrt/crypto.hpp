#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "hkrt/bytes.hpp"

// Identity-based signatures: a pseudonym is its own verification key under
// the published master public key.
//
// Two backends share one contract. The master public key, master private key
// and every signature begin with a one-byte backend id, so verify() needs no
// out-of-band backend selection.
//
//   Backend::Test     Hash-based and deterministic. Verification consults a
//                     process-local oracle holding master_private (registered
//                     by setup()), so it is NOT publicly verifiable. Every
//                     protocol-observable behavior is preserved; use it for
//                     simulation and tests only.
//   Backend::Ed25519  Certification-based IBS over Ed25519: extract() binds a
//                     per-pseudonym Ed25519 key to the pseudonym with a master
//                     signature. Publicly verifiable from master_public alone.
namespace hkrt::crypto {

enum class Backend : std::uint8_t {
    Test = 0x01,
    Ed25519 = 0x02,
};

std::string_view backend_name(Backend backend) noexcept;
Backend parse_backend(std::string_view name);

/// Fixed signature length per backend, including the backend id byte.
std::size_t signature_length(Backend backend) noexcept;

struct Pseudonym {
    std::array<std::uint8_t, 32> id{};

    /// The all-zero pseudonym is reserved for the TTP's root-signing identity.
    static constexpr Pseudonym ttp() noexcept { return {}; }
    [[nodiscard]] bool is_ttp() const noexcept { return *this == ttp(); }

    static Pseudonym from_hex(std::string_view hex);
    static Pseudonym from_bytes(ByteView bytes);
    [[nodiscard]] std::string hex() const { return to_hex(id); }

    friend constexpr auto operator<=>(const Pseudonym&, const Pseudonym&) = default;
};

using Seed = std::array<std::uint8_t, 32>;

struct MasterKeys {
    Bytes master_public;
    Bytes master_private; // never serialized into protocol messages

    [[nodiscard]] Backend backend() const;
    friend bool operator==(const MasterKeys&, const MasterKeys&) = default;
};

struct PseudonymPrivateKey {
    Pseudonym pseudonym;
    Bytes key_material;

    friend bool operator==(const PseudonymPrivateKey&, const PseudonymPrivateKey&) = default;
};

struct IbsSignature {
    Bytes bytes;

    friend bool operator==(const IbsSignature&, const IbsSignature&) = default;
};

MasterKeys setup(const Seed& seed, Backend backend = Backend::Test);

PseudonymPrivateKey extract(const MasterKeys& master, const Pseudonym& pseudonym);

IbsSignature sign(const PseudonymPrivateKey& key, ByteView message);

/// Never throws; malformed keys or signatures verify as false.
bool verify(ByteView master_public, const Pseudonym& pseudonym, ByteView message,
            const IbsSignature& sig) noexcept;

/// Signs with the reserved TTP identity.
IbsSignature sign_root(const MasterKeys& master, ByteView root_bytes);

inline bool verify_root(ByteView master_public, ByteView root_bytes, const IbsSignature& sig) noexcept {
    return verify(master_public, Pseudonym::ttp(), root_bytes, sig);
}

/// Makes test-backend signatures under `master` verifiable in this process.
/// setup() already does this; a separate process that re-derives the keys
/// (e.g. the CLI) calls it explicitly. No-op for other backends.
void register_verification_oracle(const MasterKeys& master);

/// Convenience seed derivation from a 64-bit integer (CLI / simulator).
Seed seed_from_u64(std::uint64_t value);

} // namespace hkrt::crypto

template <>
struct std::hash<hkrt::crypto::Pseudonym> {
    std::size_t operator()(const hkrt::crypto::Pseudonym& p) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
            h = (h << 8) | p.id[i];
        }
        return h;
    }
};
