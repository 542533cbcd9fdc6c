#include "hkrt/tree.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include "hkrt/hash.hpp"

namespace hkrt::tree {

namespace {

constexpr std::uint8_t kLeafTag = 0x00;
constexpr std::uint8_t kInternalTag = 0x01;
constexpr std::uint8_t kDummyTag = 0x02;
constexpr std::uint8_t kEmptyTag = 0x03;
constexpr std::string_view kRootMessageTag = "HKRT-ROOT";

std::size_t padding_for(std::size_t leaves, unsigned k) {
    if (leaves == 1) {
        return k - 1;
    }
    const std::size_t rem = (leaves - 1) % (k - 1);
    return rem == 0 ? 0 : (k - 1) - rem;
}

void validate_arity(unsigned k) {
    if (k < 2 || k > kMaxArity) {
        throw Error(Errc::InvalidArity, "k must be in [2, " + std::to_string(kMaxArity) + "], got " +
                                            std::to_string(k));
    }
}

} // namespace

std::string TreePath::label() const {
    const bool wide = std::any_of(branches.begin(), branches.end(), [](auto b) { return b >= 10; });
    std::string out = "N_0";
    for (auto b : branches) {
        if (wide) out.push_back('.');
        out += std::to_string(b);
    }
    return out;
}

Bytes SignedRoot::signed_message() const {
    return ByteWriter()
        .tag(kRootMessageTag)
        .raw(root_digest)
        .u64(epoch)
        .u8(static_cast<std::uint8_t>(k))
        .u32(leaf_count)
        .take();
}

bool SignedRoot::verify(ByteView ttp_master_public) const noexcept {
    if (k < 2 || k > kMaxArity) {
        return false;
    }
    return crypto::verify_root(ttp_master_public, signed_message(), ttp_signature);
}

SignedRoot sign_root(const Digest& root, std::uint64_t epoch, std::uint32_t k, std::uint32_t leaf_count,
                     const crypto::MasterKeys& master) {
    SignedRoot sr{root, epoch, k, leaf_count, {}};
    sr.ttp_signature = crypto::sign_root(master, sr.signed_message());
    return sr;
}

Digest leaf_digest(const Pseudonym& pseudonym, std::uint64_t revocation_epoch) {
    const auto pre = ByteWriter().u8(kLeafTag).raw(pseudonym.id).u64(revocation_epoch).take();
    return sha3_256(pre);
}

Digest internal_digest(std::span<const Digest> children) {
    ByteWriter w;
    w.u8(kInternalTag);
    for (const auto& c : children) w.raw(c);
    return sha3_256(w.bytes());
}

Digest dummy_digest(std::uint32_t index) { return sha3_256(ByteWriter().u8(kDummyTag).u32(index).bytes()); }

Digest empty_root_digest(std::uint64_t epoch) { return sha3_256(ByteWriter().u8(kEmptyTag).u64(epoch).bytes()); }

SignedRoot empty_signed_root(std::uint64_t epoch, std::uint32_t k, const crypto::MasterKeys& master) {
    validate_arity(k);
    return sign_root(empty_root_digest(epoch), epoch, k, 0, master);
}

RevocationTree RevocationTree::build_structure(std::vector<RevokedLeaf> leaves, unsigned k, std::uint64_t epoch) {
    validate_arity(k);
    if (leaves.empty()) {
        throw Error(Errc::EmptyLeafSet, "a revocation tree needs at least one leaf");
    }
    if (leaves.size() > std::numeric_limits<std::uint32_t>::max() / 2) {
        throw Error(Errc::OutOfRange, "too many leaves");
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const RevokedLeaf& a, const RevokedLeaf& b) { return a.pseudonym < b.pseudonym; });
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const auto& leaf = leaves[i];
        if (leaf.pseudonym.is_ttp()) {
            throw Error(Errc::ReservedPseudonym, "the all-zero pseudonym is reserved for the TTP");
        }
        if (leaf.revocation_epoch > epoch) {
            throw Error(Errc::FutureRevocation, leaf.pseudonym.hex());
        }
        if (i > 0 && leaves[i - 1].pseudonym == leaf.pseudonym) {
            throw Error(Errc::DuplicatePseudonym, leaf.pseudonym.hex());
        }
    }

    RevocationTree tree;
    tree.k_ = k;
    tree.epoch_ = epoch;
    tree.leaves_ = std::move(leaves);
    const auto& sorted = tree.leaves_;
    tree.dummy_count_ = padding_for(sorted.size(), k);

    auto& nodes = tree.nodes_;
    nodes.reserve(2 * (sorted.size() + tree.dummy_count_));
    for (std::uint32_t i = 0; i < sorted.size(); ++i) {
        nodes.push_back({leaf_digest(sorted[i].pseudonym, sorted[i].revocation_epoch), sorted[i].frequency, 0,
                         Kind::Leaf, i});
        tree.leaf_index_.emplace(sorted[i].pseudonym, i);
    }
    for (std::uint32_t j = 0; j < tree.dummy_count_; ++j) {
        nodes.push_back({dummy_digest(j), 0, 0, Kind::Dummy, j});
    }

    // Merge order: lowest frequency first, then shallowest subtree, then digest.
    auto merge_key = [&nodes](std::uint32_t n) {
        const auto& node = nodes[n];
        return std::tie(node.frequency, node.height, node.digest);
    };
    auto later = [&](std::uint32_t a, std::uint32_t b) { return merge_key(a) > merge_key(b); };
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, decltype(later)> queue(later);
    for (std::uint32_t n = 0; n < nodes.size(); ++n) {
        queue.push(n);
    }

    std::vector<std::uint32_t> group;
    std::vector<Digest> digests;
    while (queue.size() > 1) {
        group.clear();
        for (unsigned i = 0; i < k; ++i) {
            group.push_back(queue.top());
            queue.pop();
        }
        // Child order follows the merge key, with padding always last.
        std::sort(group.begin(), group.end(), [&](std::uint32_t a, std::uint32_t b) {
            const bool da = nodes[a].kind == Kind::Dummy;
            const bool db = nodes[b].kind == Kind::Dummy;
            if (da != db) return db;
            return merge_key(a) < merge_key(b);
        });
        Node parent{{}, 0, 0, Kind::Internal, static_cast<std::uint32_t>(tree.children_.size())};
        digests.clear();
        for (auto child : group) {
            const auto f = nodes[child].frequency;
            if (parent.frequency > std::numeric_limits<std::uint64_t>::max() - f) {
                throw Error(Errc::OutOfRange, "total frequency overflows 64 bits");
            }
            parent.frequency += f;
            parent.height = std::max(parent.height, nodes[child].height + 1);
            digests.push_back(nodes[child].digest);
            tree.children_.push_back(child);
        }
        parent.digest = internal_digest(digests);
        nodes.push_back(parent);
        queue.push(static_cast<std::uint32_t>(nodes.size() - 1));
    }
    tree.root_ = queue.top();
    tree.depth_ = nodes[tree.root_].height;
    if (tree.depth_ > kMaxDepth) {
        throw Error(Errc::OutOfRange, "tree depth " + std::to_string(tree.depth_) + " exceeds limit");
    }

    tree.paths_.resize(sorted.size());
    std::vector<std::pair<std::uint32_t, TreePath>> stack{{tree.root_, TreePath{}}};
    while (!stack.empty()) {
        auto [n, path] = std::move(stack.back());
        stack.pop_back();
        const auto& node = nodes[n];
        if (node.kind == Kind::Leaf) {
            tree.paths_[node.index] = std::move(path);
        } else if (node.kind == Kind::Internal) {
            for (unsigned b = 0; b < k; ++b) {
                TreePath child_path = path;
                child_path.branches.push_back(static_cast<std::uint8_t>(b));
                stack.emplace_back(tree.children_[node.index + b], std::move(child_path));
            }
        }
    }

    tree.signed_root_ = SignedRoot{tree.root_digest(), epoch, k, static_cast<std::uint32_t>(sorted.size()), {}};
    return tree;
}

void RevocationTree::attach_signed_root(SignedRoot root) {
    if (root.root_digest != root_digest() || root.epoch != epoch_ || root.k != k_ ||
        root.leaf_count != leaves_.size()) {
        throw Error(Errc::RootMismatch, "signed root does not describe this tree");
    }
    signed_root_ = std::move(root);
}

std::optional<TreePath> RevocationTree::lookup_path(const Pseudonym& p) const {
    auto it = leaf_index_.find(p);
    if (it == leaf_index_.end()) {
        return std::nullopt;
    }
    return paths_[it->second];
}

const RevokedLeaf* RevocationTree::find_leaf(const Pseudonym& p) const {
    auto it = leaf_index_.find(p);
    return it == leaf_index_.end() ? nullptr : &leaves_[it->second];
}

std::uint32_t RevocationTree::walk(const TreePath& path) const {
    std::uint32_t n = root_;
    for (auto b : path.branches) {
        const auto& node = nodes_[n];
        if (node.kind != Kind::Internal || b >= k_) {
            throw Error(Errc::OutOfRange, "path leaves the tree");
        }
        n = children_[node.index + b];
    }
    return n;
}

const Digest& RevocationTree::digest_at(const TreePath& path) const { return nodes_[walk(path)].digest; }

std::vector<Digest> RevocationTree::child_digests(const TreePath& path) const {
    const auto& node = nodes_[walk(path)];
    std::vector<Digest> out;
    if (node.kind == Kind::Internal) {
        for (unsigned b = 0; b < k_; ++b) {
            out.push_back(nodes_[children_[node.index + b]].digest);
        }
    }
    return out;
}

RevocationTree build_tree(std::vector<RevokedLeaf> leaves, unsigned k, std::uint64_t epoch,
                          const crypto::MasterKeys& master) {
    auto tree = RevocationTree::build_structure(std::move(leaves), k, epoch);
    tree.attach_signed_root(sign_root(tree.root_digest(), epoch, k, static_cast<std::uint32_t>(tree.leaf_count()), master));
    return tree;
}

std::uint64_t weighted_path_length(const RevocationTree& tree) {
    std::uint64_t total = 0;
    for (const auto& leaf : tree.leaves()) {
        total += leaf.frequency * tree.lookup_path(leaf.pseudonym)->depth();
    }
    return total;
}

RevocationTree update_tree(const RevocationTree& tree, std::span<const RevokedLeaf> add,
                           std::span<const Pseudonym> expire,
                           const std::map<Pseudonym, std::uint64_t>& new_frequencies, std::uint64_t new_epoch,
                           const crypto::MasterKeys& master) {
    if (new_epoch <= tree.epoch()) {
        throw Error(Errc::StaleEpoch, "new epoch " + std::to_string(new_epoch) + " must exceed " +
                                          std::to_string(tree.epoch()));
    }
    std::map<Pseudonym, RevokedLeaf> edited;
    for (const auto& leaf : tree.leaves()) {
        edited.emplace(leaf.pseudonym, leaf);
    }
    for (const auto& p : expire) {
        if (edited.erase(p) == 0) {
            throw Error(Errc::UnknownPseudonym, "cannot expire " + p.hex());
        }
    }
    for (const auto& leaf : add) {
        if (!edited.emplace(leaf.pseudonym, leaf).second) {
            throw Error(Errc::DuplicatePseudonym, leaf.pseudonym.hex());
        }
    }
    for (const auto& [p, f] : new_frequencies) {
        if (auto it = edited.find(p); it != edited.end()) {
            it->second.frequency = f;
        }
    }
    std::vector<RevokedLeaf> leaves;
    leaves.reserve(edited.size());
    for (auto& [p, leaf] : edited) {
        leaves.push_back(leaf);
    }
    return build_tree(std::move(leaves), tree.k(), new_epoch, master);
}

std::optional<RevocationProof> generate_proof(const RevocationTree& tree, const Pseudonym& p) {
    const auto* leaf = tree.find_leaf(p);
    if (leaf == nullptr) {
        return std::nullopt;
    }
    RevocationProof proof;
    proof.pseudonym = p;
    proof.revocation_epoch = leaf->revocation_epoch;
    proof.path = *tree.lookup_path(p);
    proof.signed_root = tree.signed_root();

    const auto depth = proof.path.depth();
    proof.siblings.reserve(depth * (tree.k() - 1));
    TreePath prefix;
    std::vector<std::vector<Digest>> levels;
    for (std::size_t level = 0; level < depth; ++level) {
        auto children = tree.child_digests(prefix);
        const auto branch = proof.path.branches[level];
        children.erase(children.begin() + branch);
        levels.push_back(std::move(children));
        prefix.branches.push_back(branch);
    }
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        proof.siblings.insert(proof.siblings.end(), it->begin(), it->end());
    }
    return proof;
}

std::optional<Digest> recompute_root(const RevocationProof& proof) {
    const auto k = proof.signed_root.k;
    const auto depth = proof.path.depth();
    if (k < 2 || k > kMaxArity || depth == 0 || depth > kMaxDepth ||
        proof.siblings.size() != static_cast<std::size_t>(k - 1) * depth) {
        return std::nullopt;
    }
    for (auto b : proof.path.branches) {
        if (b >= k) return std::nullopt;
    }
    Digest current = leaf_digest(proof.pseudonym, proof.revocation_epoch);
    std::vector<Digest> children(k);
    for (std::size_t step = 0; step < depth; ++step) {
        const auto branch = proof.path.branches[depth - 1 - step];
        const auto* sib = proof.siblings.data() + step * (k - 1);
        std::size_t s = 0;
        for (unsigned c = 0; c < k; ++c) {
            children[c] = (c == branch) ? current : sib[s++];
        }
        current = internal_digest(children);
    }
    return current;
}

std::string_view reject_reason_name(RejectReason reason) noexcept {
    switch (reason) {
        case RejectReason::Malformed: return "malformed";
        case RejectReason::PseudonymMismatch: return "pseudonym mismatch";
        case RejectReason::RootMismatch: return "root mismatch";
        case RejectReason::BadSignature: return "bad signature";
        case RejectReason::Stale: return "stale";
    }
    return "unknown";
}

Verdict verify_proof(const RevocationProof& proof, const Pseudonym& p, ByteView ttp_master_public,
                     std::uint64_t current_epoch, std::uint64_t max_age) noexcept {
    try {
        const auto& root = proof.signed_root;
        if (root.leaf_count == 0 || proof.revocation_epoch > root.epoch) {
            return Verdict::reject(RejectReason::Malformed);
        }
        const auto recomputed = recompute_root(proof);
        if (!recomputed) {
            return Verdict::reject(RejectReason::Malformed);
        }
        if (proof.pseudonym != p) {
            return Verdict::reject(RejectReason::PseudonymMismatch);
        }
        if (*recomputed != root.root_digest) {
            return Verdict::reject(RejectReason::RootMismatch);
        }
        if (!root.verify(ttp_master_public)) {
            return Verdict::reject(RejectReason::BadSignature);
        }
        const std::uint64_t age = current_epoch > root.epoch ? current_epoch - root.epoch : 0;
        if (age > max_age) {
            return Verdict::reject(RejectReason::Stale);
        }
        return Verdict::accept();
    } catch (...) {
        return Verdict::reject(RejectReason::Malformed);
    }
}

} // namespace hkrt::tree
