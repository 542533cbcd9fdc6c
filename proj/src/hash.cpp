#include "hkrt/hash.hpp"

#include <memory>

#include <openssl/evp.h>

namespace hkrt {

namespace {

// Explicit fetch once; the implicit fetch behind sha3_md() repeats the
// provider lookup on every init.
const EVP_MD* sha3_md() {
    static const EVP_MD* md = EVP_MD_fetch(nullptr, "SHA3-256", nullptr);
    return md;
}

} // namespace

Digest sha3_256(std::initializer_list<ByteView> parts) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), sha3_md(), nullptr) != 1) {
        throw std::runtime_error("SHA3-256 unavailable");
    }
    for (auto part : parts) {
        if (!part.empty()) {
            EVP_DigestUpdate(ctx.get(), part.data(), part.size());
        }
    }
    Digest out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), out.data(), &len);
    return out;
}

} // namespace hkrt
