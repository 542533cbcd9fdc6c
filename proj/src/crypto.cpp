#include "hkrt/crypto.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>

#include <openssl/evp.h>

#include "hkrt/hash.hpp"

namespace hkrt::crypto {

namespace {

constexpr std::size_t kTestSigLen = 1 + 32 + 32;
constexpr std::size_t kEdSigLen = 1 + 32 + 64 + 64;
constexpr std::string_view kCertTag = "hkrt/ibs-cert";

ByteView view(const Digest& d) { return {d.data(), d.size()}; }
ByteView view(const Pseudonym& p) { return {p.id.data(), p.id.size()}; }

// Test backend verification oracle: master_public -> master secret.
class OracleRegistry {
public:
    void add(const Bytes& mpu, const Bytes& secret) {
        std::unique_lock lock(mu_);
        secrets_.emplace(mpu, secret);
    }
    std::optional<Bytes> find(ByteView mpu) const {
        std::shared_lock lock(mu_);
        auto it = secrets_.find(Bytes(mpu.begin(), mpu.end()));
        if (it == secrets_.end()) return std::nullopt;
        return it->second;
    }

private:
    mutable std::shared_mutex mu_;
    std::map<Bytes, Bytes> secrets_;
};

OracleRegistry& oracle() {
    static OracleRegistry registry;
    return registry;
}

Digest test_signing_key(ByteView secret, const Pseudonym& p) { return sha3_256({secret, view(p)}); }

Digest test_public_tag(ByteView secret, const Pseudonym& p) {
    return sha3_256({secret, view(p), as_bytes("pub")});
}

// --- Ed25519 via OpenSSL raw keys -----------------------------------------

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

PkeyPtr ed_private(ByteView seed) {
    return {EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()),
            &EVP_PKEY_free};
}

PkeyPtr ed_public(ByteView pk) {
    return {EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pk.data(), pk.size()),
            &EVP_PKEY_free};
}

std::array<std::uint8_t, 32> ed_public_of(ByteView seed) {
    auto key = ed_private(seed);
    std::array<std::uint8_t, 32> pk{};
    std::size_t len = pk.size();
    if (!key || EVP_PKEY_get_raw_public_key(key.get(), pk.data(), &len) != 1) {
        throw std::runtime_error("Ed25519 key derivation failed");
    }
    return pk;
}

std::array<std::uint8_t, 64> ed_sign(ByteView seed, ByteView msg) {
    auto key = ed_private(seed);
    MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<std::uint8_t, 64> sig{};
    std::size_t len = sig.size();
    if (!key || !ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
        EVP_DigestSign(ctx.get(), sig.data(), &len, msg.data(), msg.size()) != 1) {
        throw std::runtime_error("Ed25519 signing failed");
    }
    return sig;
}

bool ed_verify(ByteView pk, ByteView msg, ByteView sig) noexcept {
    auto key = ed_public(pk);
    MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!key || !ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
        return false;
    }
    return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
}

Bytes cert_message(const Pseudonym& p, ByteView user_pk) {
    return ByteWriter().tag(kCertTag).raw(view(p)).raw(user_pk).take();
}

bool known_backend(std::uint8_t id) noexcept {
    return id == static_cast<std::uint8_t>(Backend::Test) ||
           id == static_cast<std::uint8_t>(Backend::Ed25519);
}

} // namespace

std::string_view backend_name(Backend backend) noexcept {
    return backend == Backend::Test ? "test" : "ed25519";
}

Backend parse_backend(std::string_view name) {
    if (name == "test") return Backend::Test;
    if (name == "ed25519") return Backend::Ed25519;
    throw Error(Errc::InvalidConfig, "unknown signature backend '" + std::string(name) + "'");
}

std::size_t signature_length(Backend backend) noexcept {
    return backend == Backend::Test ? kTestSigLen : kEdSigLen;
}

Pseudonym Pseudonym::from_hex(std::string_view hex) {
    if (hex.size() != 64) {
        throw Error(Errc::OutOfRange, "pseudonym must be 64 hex characters");
    }
    return from_bytes(hkrt::from_hex(hex));
}

Pseudonym Pseudonym::from_bytes(ByteView bytes) {
    if (bytes.size() != 32) {
        throw Error(Errc::OutOfRange, "pseudonym must be 32 bytes");
    }
    Pseudonym p;
    std::copy(bytes.begin(), bytes.end(), p.id.begin());
    return p;
}

Backend MasterKeys::backend() const {
    if (master_public.empty() || !known_backend(master_public[0])) {
        throw Error(Errc::OutOfRange, "master key has unknown backend id");
    }
    return static_cast<Backend>(master_public[0]);
}

MasterKeys setup(const Seed& seed, Backend backend) {
    const auto id = static_cast<std::uint8_t>(backend);
    MasterKeys keys;
    if (backend == Backend::Test) {
        const auto secret = sha3_256({as_bytes("hkrt/test/master"), seed});
        const auto pub = sha3_256({as_bytes("hkrt/test/public"), view(secret)});
        keys.master_private = ByteWriter().u8(id).raw(view(secret)).take();
        keys.master_public = ByteWriter().u8(id).raw(view(pub)).take();
        register_verification_oracle(keys);
    } else {
        const auto secret = sha3_256({as_bytes("hkrt/ed25519/master"), seed});
        const auto pub = ed_public_of(view(secret));
        keys.master_private = ByteWriter().u8(id).raw(view(secret)).take();
        keys.master_public = ByteWriter().u8(id).raw(pub).take();
    }
    return keys;
}

void register_verification_oracle(const MasterKeys& master) {
    if (master.backend() == Backend::Test) {
        oracle().add(master.master_public, Bytes(master.master_private.begin() + 1, master.master_private.end()));
    }
}

PseudonymPrivateKey extract(const MasterKeys& master, const Pseudonym& pseudonym) {
    const ByteView secret = ByteView(master.master_private).subspan(1);
    PseudonymPrivateKey key{pseudonym, {}};
    if (master.backend() == Backend::Test) {
        key.key_material = ByteWriter()
                               .u8(static_cast<std::uint8_t>(Backend::Test))
                               .raw(view(test_signing_key(secret, pseudonym)))
                               .raw(view(test_public_tag(secret, pseudonym)))
                               .take();
    } else {
        const auto user_seed = sha3_256({as_bytes("hkrt/ed25519/user"), secret, view(pseudonym)});
        const auto user_pk = ed_public_of(view(user_seed));
        const auto cert = ed_sign(secret, cert_message(pseudonym, user_pk));
        key.key_material = ByteWriter()
                               .u8(static_cast<std::uint8_t>(Backend::Ed25519))
                               .raw(view(user_seed))
                               .raw(user_pk)
                               .raw(cert)
                               .take();
    }
    return key;
}

IbsSignature sign(const PseudonymPrivateKey& key, ByteView message) {
    const ByteView km = key.key_material;
    if (km.size() == 1 + 32 + 32 && km[0] == static_cast<std::uint8_t>(Backend::Test)) {
        const auto mac = sha3_256({km.subspan(1, 32), message});
        return {ByteWriter()
                    .u8(static_cast<std::uint8_t>(Backend::Test))
                    .raw(km.subspan(33, 32))
                    .raw(view(mac))
                    .take()};
    }
    if (km.size() == 1 + 32 + 32 + 64 && km[0] == static_cast<std::uint8_t>(Backend::Ed25519)) {
        const auto sig = ed_sign(km.subspan(1, 32), message);
        return {ByteWriter()
                    .u8(static_cast<std::uint8_t>(Backend::Ed25519))
                    .raw(km.subspan(33, 96))
                    .raw(sig)
                    .take()};
    }
    throw Error(Errc::OutOfRange, "unrecognized private key material");
}

bool verify(ByteView master_public, const Pseudonym& pseudonym, ByteView message,
            const IbsSignature& sig) noexcept {
    const ByteView s = sig.bytes;
    if (master_public.size() != 33 || s.empty() || s[0] != master_public[0]) {
        return false;
    }
    const auto backend = master_public[0];
    if (backend == static_cast<std::uint8_t>(Backend::Test)) {
        if (s.size() != kTestSigLen) return false;
        const auto secret = oracle().find(master_public);
        if (!secret) return false;
        const auto tag = test_public_tag(*secret, pseudonym);
        const auto mac = sha3_256({view(test_signing_key(*secret, pseudonym)), message});
        return std::equal(tag.begin(), tag.end(), s.begin() + 1) &&
               std::equal(mac.begin(), mac.end(), s.begin() + 33);
    }
    if (backend == static_cast<std::uint8_t>(Backend::Ed25519)) {
        if (s.size() != kEdSigLen) return false;
        const auto user_pk = s.subspan(1, 32);
        const auto cert = s.subspan(33, 64);
        const auto msg_sig = s.subspan(97, 64);
        try {
            return ed_verify(master_public.subspan(1), cert_message(pseudonym, user_pk), cert) &&
                   ed_verify(user_pk, message, msg_sig);
        } catch (...) {
            return false;
        }
    }
    return false;
}

IbsSignature sign_root(const MasterKeys& master, ByteView root_bytes) {
    return sign(extract(master, Pseudonym::ttp()), root_bytes);
}

Seed seed_from_u64(std::uint64_t value) {
    const auto encoded = ByteWriter().tag("hkrt/seed").u64(value).take();
    return sha3_256(encoded);
}

} // namespace hkrt::crypto
