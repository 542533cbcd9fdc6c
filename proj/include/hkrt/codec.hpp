#pragma once

#include <optional>

#include "hkrt/bytes.hpp"
#include "hkrt/tree.hpp"

// Canonical binary encodings. All integers are big-endian; every decoder
// rejects bad magic, unknown versions, truncation, trailing bytes and
// out-of-range or non-canonical fields with a distinct Errc.
//
// SignedRoot block:
//   root_digest[32] epoch:u64 k:u8 leaf_count:u32 signature:blob
//
// Tree snapshot ("HCRT"):
//   "HCRT" version:u8 k:u8 epoch:u64 leaf_count:u32
//   leaf_count x (pseudonym[32] revocation_epoch:u64 frequency:u64)
//   SignedRoot block
// Leaves appear in ascending pseudonym order. A leaf count of zero encodes
// the empty revocation set; its root must equal empty_root_digest(epoch).
// Frequencies are committed to only through the tree shape they produce.
//
// Proof ("HPRF"):
//   "HPRF" version:u8 k:u8 path_len:u8 path[path_len]
//   siblings[(k-1) * path_len][32]   leaf-adjacent level first
//   pseudonym[32] revocation_epoch:u64
//   SignedRoot block
namespace hkrt::codec {

inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::size_t kMaxSignatureBytes = 1024;

void write_signed_root(ByteWriter& w, const tree::SignedRoot& root);
tree::SignedRoot read_signed_root(ByteReader& r);

/// A published revocation state: a tree, or the signed empty set.
struct TreeState {
    std::optional<tree::RevocationTree> tree;
    tree::SignedRoot signed_root;

    [[nodiscard]] bool empty() const noexcept { return !tree.has_value(); }
    [[nodiscard]] std::uint64_t epoch() const noexcept { return signed_root.epoch; }
};

Bytes encode_state(const TreeState& state);
/// Rebuilds the tree from its leaves and checks the rebuilt root against the
/// stored SignedRoot (Errc::RootMismatch). Does not check the signature.
TreeState decode_state(ByteView bytes);

Bytes encode_tree(const tree::RevocationTree& tree);
/// As decode_state, but an empty snapshot is rejected with EmptyLeafSet.
tree::RevocationTree decode_tree(ByteView bytes);

Bytes encode_proof(const tree::RevocationProof& proof);
tree::RevocationProof decode_proof(ByteView bytes);

} // namespace hkrt::codec
