#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hkrt/bytes.hpp"
#include "hkrt/crypto.hpp"

// Frequency-weighted Huffman k-ary hash trees of revoked pseudonyms.
//
// Leaves are merged k at a time, lowest frequency first, so the most queried
// pseudonyms end up closest to the root and get the shortest proofs. Every
// internal node has exactly k children: the leaf set is padded with
// zero-frequency dummy leaves until (t' - 1) mod (k - 1) == 0 (a single leaf
// is padded to k so that depth is at least one).
//
// Preimages are domain separated:
//   leaf      h(0x00 || pseudonym || revocation_epoch_be64)
//   internal  h(0x01 || child_0 || ... || child_{k-1})
//   dummy     h(0x02 || dummy_index_be32)
//   empty     h(0x03 || epoch_be64)      root of an empty revocation set
namespace hkrt::tree {

using crypto::Pseudonym;

inline constexpr unsigned kMaxArity = 255;
inline constexpr unsigned kMaxDepth = 255;

struct RevokedLeaf {
    Pseudonym pseudonym;
    std::uint64_t revocation_epoch = 0;
    std::uint64_t frequency = 0;

    friend bool operator==(const RevokedLeaf&, const RevokedLeaf&) = default;
};

/// Child indices from the root down to a node, each in [0, k-1].
struct TreePath {
    std::vector<std::uint8_t> branches;

    [[nodiscard]] std::size_t depth() const noexcept { return branches.size(); }
    /// Node label in N_<root><branches> form, e.g. "N_01221" for [1,2,2,1].
    [[nodiscard]] std::string label() const;

    friend bool operator==(const TreePath&, const TreePath&) = default;
};

struct SignedRoot {
    Digest root_digest{};
    std::uint64_t epoch = 0;
    std::uint32_t k = 0;
    std::uint32_t leaf_count = 0;
    crypto::IbsSignature ttp_signature;

    /// Canonical byte string covered by ttp_signature.
    [[nodiscard]] Bytes signed_message() const;
    [[nodiscard]] bool verify(ByteView ttp_master_public) const noexcept;

    friend bool operator==(const SignedRoot&, const SignedRoot&) = default;
};

SignedRoot sign_root(const Digest& root, std::uint64_t epoch, std::uint32_t k,
                     std::uint32_t leaf_count, const crypto::MasterKeys& master);

Digest leaf_digest(const Pseudonym& pseudonym, std::uint64_t revocation_epoch);
Digest internal_digest(std::span<const Digest> children);
Digest dummy_digest(std::uint32_t index);
Digest empty_root_digest(std::uint64_t epoch);

/// Signed root for an epoch with no revoked pseudonyms.
SignedRoot empty_signed_root(std::uint64_t epoch, std::uint32_t k, const crypto::MasterKeys& master);

class RevocationTree {
public:
    [[nodiscard]] unsigned k() const noexcept { return k_; }
    [[nodiscard]] std::uint64_t epoch() const noexcept { return epoch_; }
    /// Leaves in canonical (pseudonym-ascending) order.
    [[nodiscard]] const std::vector<RevokedLeaf>& leaves() const noexcept { return leaves_; }
    [[nodiscard]] std::size_t leaf_count() const noexcept { return leaves_.size(); }
    [[nodiscard]] std::size_t dummy_count() const noexcept { return dummy_count_; }
    /// Edges on the longest root-to-leaf path.
    [[nodiscard]] unsigned depth() const noexcept { return depth_; }
    [[nodiscard]] const Digest& root_digest() const noexcept { return nodes_[root_].digest; }
    [[nodiscard]] const SignedRoot& signed_root() const noexcept { return signed_root_; }

    [[nodiscard]] std::optional<TreePath> lookup_path(const Pseudonym& p) const;
    [[nodiscard]] const RevokedLeaf* find_leaf(const Pseudonym& p) const;

    /// Digest of the node reached by `path`; throws Error(OutOfRange) if the
    /// path leaves the tree.
    [[nodiscard]] const Digest& digest_at(const TreePath& path) const;
    /// Child digests of the internal node at `path`; empty for leaves.
    [[nodiscard]] std::vector<Digest> child_digests(const TreePath& path) const;

    /// Unsigned structure; the result carries a SignedRoot with an empty
    /// signature. Used by decoders, which attach the stored signature.
    static RevocationTree build_structure(std::vector<RevokedLeaf> leaves, unsigned k, std::uint64_t epoch);
    void attach_signed_root(SignedRoot root);

private:
    enum class Kind : std::uint8_t { Leaf, Dummy, Internal };

    struct Node {
        Digest digest{};
        std::uint64_t frequency = 0;
        std::uint32_t height = 0;
        Kind kind = Kind::Leaf;
        std::uint32_t index = 0; // leaf index, dummy index, or offset into children_
    };

    RevocationTree() = default;
    std::uint32_t walk(const TreePath& path) const;

    unsigned k_ = 0;
    std::uint64_t epoch_ = 0;
    std::vector<RevokedLeaf> leaves_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> children_;
    std::uint32_t root_ = 0;
    std::size_t dummy_count_ = 0;
    unsigned depth_ = 0;
    std::unordered_map<Pseudonym, std::uint32_t> leaf_index_;
    std::vector<TreePath> paths_; // by leaf index
    SignedRoot signed_root_;
};

/// Greedy k-ary Huffman construction plus TTP signature over the root.
/// Throws Error with EmptyLeafSet, InvalidArity, DuplicatePseudonym,
/// ReservedPseudonym or FutureRevocation.
RevocationTree build_tree(std::vector<RevokedLeaf> leaves, unsigned k, std::uint64_t epoch,
                          const crypto::MasterKeys& master);

inline std::optional<TreePath> lookup_path(const RevocationTree& tree, const Pseudonym& p) {
    return tree.lookup_path(p);
}

/// Σ frequency × depth over real (non-dummy) leaves.
std::uint64_t weighted_path_length(const RevocationTree& tree);

/// Rebuilds from the edited leaf set; never mutates `tree`.
/// Frequencies for pseudonyms absent from the final leaf set are ignored.
RevocationTree update_tree(const RevocationTree& tree, std::span<const RevokedLeaf> add,
                           std::span<const Pseudonym> expire,
                           const std::map<Pseudonym, std::uint64_t>& new_frequencies,
                           std::uint64_t new_epoch, const crypto::MasterKeys& master);

struct RevocationProof {
    Pseudonym pseudonym;
    std::uint64_t revocation_epoch = 0;
    TreePath path;
    /// k-1 digests per level, leaf-adjacent level first; within a level the
    /// siblings keep their child order with the on-path child removed.
    std::vector<Digest> siblings;
    SignedRoot signed_root;

    friend bool operator==(const RevocationProof&, const RevocationProof&) = default;
};

std::optional<RevocationProof> generate_proof(const RevocationTree& tree, const Pseudonym& p);

/// Recomputes the root from a leaf, its path and the sibling digests.
/// Returns nullopt if the proof is structurally malformed.
std::optional<Digest> recompute_root(const RevocationProof& proof);

enum class RejectReason : std::uint8_t {
    Malformed,
    PseudonymMismatch,
    RootMismatch,
    BadSignature,
    Stale,
};

std::string_view reject_reason_name(RejectReason reason) noexcept;

struct Verdict {
    bool accepted = false;
    RejectReason reason = RejectReason::Malformed; // meaningful only when rejected

    static Verdict accept() noexcept { return {true, RejectReason::Malformed}; }
    static Verdict reject(RejectReason r) noexcept { return {false, r}; }
    explicit operator bool() const noexcept { return accepted; }
};

/// Checks run in order: structure, pseudonym, root recomputation, TTP
/// signature, freshness. The first failure is reported. A root newer than
/// current_epoch counts as age zero.
Verdict verify_proof(const RevocationProof& proof, const Pseudonym& p, ByteView ttp_master_public,
                     std::uint64_t current_epoch, std::uint64_t max_age) noexcept;

} // namespace hkrt::tree
