#include "hkrt/codec.hpp"

namespace hkrt::codec {

namespace {

constexpr std::string_view kTreeMagic = "HCRT";
constexpr std::string_view kProofMagic = "HPRF";

void check_version(ByteReader& r) {
    const auto version = r.u8();
    if (version != kFormatVersion) {
        throw Error(Errc::UnsupportedVersion, "version " + std::to_string(version));
    }
}

unsigned read_arity(ByteReader& r) {
    const unsigned k = r.u8();
    if (k < 2) {
        throw Error(Errc::OutOfRange, "arity " + std::to_string(k));
    }
    return k;
}

} // namespace

void write_signed_root(ByteWriter& w, const tree::SignedRoot& root) {
    w.raw(root.root_digest)
        .u64(root.epoch)
        .u8(static_cast<std::uint8_t>(root.k))
        .u32(root.leaf_count)
        .blob(root.ttp_signature.bytes);
}

tree::SignedRoot read_signed_root(ByteReader& r) {
    tree::SignedRoot root;
    root.root_digest = r.digest();
    root.epoch = r.u64();
    root.k = read_arity(r);
    root.leaf_count = r.u32();
    root.ttp_signature.bytes = r.blob(kMaxSignatureBytes);
    return root;
}

Bytes encode_state(const TreeState& state) {
    const auto& root = state.signed_root;
    ByteWriter w;
    w.tag(kTreeMagic).u8(kFormatVersion).u8(static_cast<std::uint8_t>(root.k)).u64(root.epoch);
    if (state.tree) {
        const auto& leaves = state.tree->leaves();
        w.u32(static_cast<std::uint32_t>(leaves.size()));
        for (const auto& leaf : leaves) {
            w.raw(leaf.pseudonym.id).u64(leaf.revocation_epoch).u64(leaf.frequency);
        }
    } else {
        w.u32(0);
    }
    write_signed_root(w, root);
    return w.take();
}

TreeState decode_state(ByteView bytes) {
    ByteReader r(bytes);
    r.expect_tag(kTreeMagic);
    check_version(r);
    const unsigned k = read_arity(r);
    const auto epoch = r.u64();
    const auto count = r.u32();
    constexpr std::size_t kLeafBytes = 32 + 8 + 8;
    if (count > r.remaining() / kLeafBytes) {
        throw Error(Errc::Truncated, "leaf table shorter than leaf count");
    }
    std::vector<tree::RevokedLeaf> leaves(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        leaves[i].pseudonym = crypto::Pseudonym::from_bytes(r.raw(32));
        leaves[i].revocation_epoch = r.u64();
        leaves[i].frequency = r.u64();
        if (i > 0 && !(leaves[i - 1].pseudonym < leaves[i].pseudonym)) {
            throw Error(Errc::NonCanonical, "leaves not in strictly ascending pseudonym order");
        }
    }
    auto root = read_signed_root(r);
    r.finish();
    if (root.k != k || root.epoch != epoch || root.leaf_count != count) {
        throw Error(Errc::OutOfRange, "signed root header disagrees with snapshot header");
    }

    TreeState state;
    if (count == 0) {
        if (root.root_digest != tree::empty_root_digest(epoch)) {
            throw Error(Errc::RootMismatch, "empty snapshot with non-empty root");
        }
    } else {
        auto rebuilt = tree::RevocationTree::build_structure(std::move(leaves), k, epoch);
        rebuilt.attach_signed_root(root);
        state.tree = std::move(rebuilt);
    }
    state.signed_root = std::move(root);
    return state;
}

Bytes encode_tree(const tree::RevocationTree& tree) { return encode_state(TreeState{tree, tree.signed_root()}); }

tree::RevocationTree decode_tree(ByteView bytes) {
    auto state = decode_state(bytes);
    if (state.empty()) {
        throw Error(Errc::EmptyLeafSet, "snapshot holds the empty revocation set");
    }
    return std::move(*state.tree);
}

Bytes encode_proof(const tree::RevocationProof& proof) {
    ByteWriter w;
    w.tag(kProofMagic)
        .u8(kFormatVersion)
        .u8(static_cast<std::uint8_t>(proof.signed_root.k))
        .u8(static_cast<std::uint8_t>(proof.path.depth()))
        .raw(proof.path.branches);
    for (const auto& s : proof.siblings) w.raw(s);
    w.raw(proof.pseudonym.id).u64(proof.revocation_epoch);
    write_signed_root(w, proof.signed_root);
    return w.take();
}

tree::RevocationProof decode_proof(ByteView bytes) {
    ByteReader r(bytes);
    r.expect_tag(kProofMagic);
    check_version(r);
    const unsigned k = read_arity(r);
    const unsigned depth = r.u8();
    if (depth == 0) {
        throw Error(Errc::OutOfRange, "empty proof path");
    }
    tree::RevocationProof proof;
    auto path = r.raw(depth);
    proof.path.branches.assign(path.begin(), path.end());
    for (auto b : proof.path.branches) {
        if (b >= k) throw Error(Errc::OutOfRange, "branch index " + std::to_string(b));
    }
    proof.siblings.resize(static_cast<std::size_t>(k - 1) * depth);
    for (auto& s : proof.siblings) s = r.digest();
    proof.pseudonym = crypto::Pseudonym::from_bytes(r.raw(32));
    proof.revocation_epoch = r.u64();
    proof.signed_root = read_signed_root(r);
    r.finish();
    if (proof.signed_root.k != k) {
        throw Error(Errc::OutOfRange, "proof arity disagrees with signed root");
    }
    return proof;
}

} // namespace hkrt::codec
