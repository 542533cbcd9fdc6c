#include "oracles.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>

namespace hkrt::oracle {

namespace {

constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max() / 4;

struct Search {
    const std::vector<std::uint64_t>& w;
    unsigned k;
    std::unordered_map<std::uint32_t, std::uint64_t> subtree_memo;
    std::map<std::pair<std::uint32_t, unsigned>, std::uint64_t> forest_memo;

    std::uint64_t weight(std::uint32_t mask) const {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (mask & (1U << i)) total += w[i];
        }
        return total;
    }

    // Cheapest subtree holding exactly `mask`, depths measured from its root.
    std::uint64_t subtree(std::uint32_t mask) {
        if ((mask & (mask - 1)) == 0) return 0;
        if (auto it = subtree_memo.find(mask); it != subtree_memo.end()) return it->second;
        // Root has at least two children: the block holding the lowest leaf
        // must be a proper subset.
        const std::uint32_t low = mask & (~mask + 1);
        const std::uint32_t rest = mask ^ low;
        std::uint64_t best = kInf;
        for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
            const std::uint32_t block = sub | low;
            if (block != mask) {
                const auto other = forest(mask ^ block, k - 1);
                if (other < kInf) best = std::min(best, subtree(block) + other);
            }
            if (sub == 0) break;
        }
        const auto result = best + weight(mask);
        subtree_memo.emplace(mask, result);
        return result;
    }

    // Cheapest split of `mask` into at most `blocks` subtrees.
    std::uint64_t forest(std::uint32_t mask, unsigned blocks) {
        if (mask == 0) return 0;
        if (blocks == 0) return kInf;
        auto key = std::make_pair(mask, blocks);
        if (auto it = forest_memo.find(key); it != forest_memo.end()) return it->second;
        const std::uint32_t low = mask & (~mask + 1);
        const std::uint32_t rest = mask ^ low;
        std::uint64_t best = kInf;
        for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
            const std::uint32_t block = sub | low;
            const auto other = forest(mask ^ block, blocks - 1);
            if (other < kInf) best = std::min(best, subtree(block) + other);
            if (sub == 0) break;
        }
        forest_memo.emplace(key, best);
        return best;
    }
};

} // namespace

std::uint64_t exhaustive_min_wpl(const std::vector<std::uint64_t>& weights, unsigned k) {
    if (weights.size() == 1) return weights[0];
    Search s{weights, k, {}, {}};
    return s.subtree((1U << weights.size()) - 1);
}

std::vector<unsigned> binary_huffman_code_lengths(const std::vector<std::uint64_t>& weights) {
    struct Group {
        std::uint64_t weight;
        std::vector<std::size_t> symbols;
    };
    std::vector<Group> pool;
    for (std::size_t i = 0; i < weights.size(); ++i) pool.push_back({weights[i], {i}});
    std::vector<unsigned> lengths(weights.size(), 0);
    if (pool.size() == 1) {
        lengths[0] = 1;
        return lengths;
    }
    while (pool.size() > 1) {
        std::stable_sort(pool.begin(), pool.end(), [](const Group& a, const Group& b) { return a.weight < b.weight; });
        Group merged{pool[0].weight + pool[1].weight, {}};
        for (int j = 0; j < 2; ++j) {
            for (auto s : pool[j].symbols) {
                ++lengths[s];
                merged.symbols.push_back(s);
            }
        }
        pool.erase(pool.begin(), pool.begin() + 2);
        pool.push_back(std::move(merged));
    }
    return lengths;
}

} // namespace hkrt::oracle
