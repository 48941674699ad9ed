#include "comet/tree_diff.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace comet {

const char* node_op_name(NodeOp op) {
    switch (op) {
        case NodeOp::Keep: return "keep";
        case NodeOp::Insert: return "insert";
        case NodeOp::Del: return "del";
        case NodeOp::Update: return "update";
    }
    return "?";
}

namespace {

struct NodeInfo {
    std::uint64_t hash = 0;
    int height = 0;
    int size = 1;  // subtree node count
};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t str_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<NodeInfo> compute_info(const Ast& ast) {
    std::vector<NodeInfo> info(ast.nodes.size());
    // children have larger preorder ids, so a reverse sweep is bottom-up
    for (int id = static_cast<int>(ast.nodes.size()) - 1; id >= 0; --id) {
        const AstNode& n = ast.at(id);
        std::uint64_t h = mix(static_cast<std::uint64_t>(n.type) + 1,
                              str_hash(n.value));
        int height = 0;
        int size = 1;
        for (int c : n.children) {
            h = mix(h, info[c].hash);
            height = std::max(height, info[c].height + 1);
            size += info[c].size;
        }
        info[id] = NodeInfo{h, height, size};
    }
    return info;
}

}  // namespace

TreeDiff tree_diff(const Ast& old_ast, const Ast& new_ast) {
    const int n_old = static_cast<int>(old_ast.nodes.size());
    const int n_new = static_cast<int>(new_ast.nodes.size());
    TreeDiff diff;
    diff.old_to_new.assign(n_old, -1);
    diff.new_to_old.assign(n_new, -1);

    auto old_info = compute_info(old_ast);
    auto new_info = compute_info(new_ast);

    auto match_subtrees = [&](int o, int n) {
        // pair two identical subtrees node by node (same shape)
        std::function<void(int, int)> rec = [&](int a, int b) {
            diff.old_to_new[a] = b;
            diff.new_to_old[b] = a;
            const auto& ca = old_ast.at(a).children;
            const auto& cb = new_ast.at(b).children;
            for (std::size_t k = 0; k < ca.size(); ++k) rec(ca[k], cb[k]);
        };
        rec(o, n);
    };

    // Phase 1: maximal identical subtrees, tallest first, paired in order.
    std::vector<int> old_by_height(n_old), new_by_height(n_new);
    for (int i = 0; i < n_old; ++i) old_by_height[i] = i;
    for (int i = 0; i < n_new; ++i) new_by_height[i] = i;
    auto taller = [](const std::vector<NodeInfo>& info) {
        return [&info](int a, int b) {
            if (info[a].height != info[b].height)
                return info[a].height > info[b].height;
            return a < b;
        };
    };
    std::stable_sort(old_by_height.begin(), old_by_height.end(),
                     taller(old_info));
    std::stable_sort(new_by_height.begin(), new_by_height.end(),
                     taller(new_info));

    std::multimap<std::uint64_t, int> new_by_hash;
    for (int id : new_by_height)
        new_by_hash.emplace(new_info[id].hash, id);

    for (int o : old_by_height) {
        if (diff.old_to_new[o] != -1) continue;
        auto [lo, hi] = new_by_hash.equal_range(old_info[o].hash);
        for (auto it = lo; it != hi; ++it) {
            int n = it->second;
            if (diff.new_to_old[n] != -1) continue;
            if (new_info[n].height != old_info[o].height) continue;
            match_subtrees(o, n);
            new_by_hash.erase(it);
            break;
        }
    }

    // Phase 2a: bottom-up container matching by matched-children ratio.
    auto children_ratio = [&](int o, int n) {
        const auto& co = old_ast.at(o).children;
        const auto& cn = new_ast.at(n).children;
        std::size_t denom = std::max(co.size(), cn.size());
        if (denom == 0) return 0.0;
        int hits = 0;
        for (int c : co) {
            int partner = diff.old_to_new[c];
            if (partner != -1 &&
                std::find(cn.begin(), cn.end(), partner) != cn.end())
                ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(denom);
    };

    for (int o = n_old - 1; o >= 0; --o) {
        if (diff.old_to_new[o] != -1) continue;
        if (old_ast.at(o).children.empty()) continue;
        int best = -1;
        double best_ratio = 0.0;
        for (int n = 0; n < n_new; ++n) {
            if (diff.new_to_old[n] != -1) continue;
            if (new_ast.at(n).type != old_ast.at(o).type) continue;
            double r = children_ratio(o, n);
            if (r < 0.5) continue;
            if (r > best_ratio ||
                (r == best_ratio && best != -1 &&
                 std::abs(n - o) < std::abs(best - o))) {
                best = n;
                best_ratio = r;
            }
        }
        if (best != -1) {
            diff.old_to_new[o] = best;
            diff.new_to_old[best] = o;
        }
    }

    // Roots of single-method diffs should correspond even when everything
    // inside changed.
    if (diff.old_to_new[old_ast.root] == -1 &&
        diff.new_to_old[new_ast.root] == -1 &&
        old_ast.at(old_ast.root).type == new_ast.at(new_ast.root).type) {
        diff.old_to_new[old_ast.root] = new_ast.root;
        diff.new_to_old[new_ast.root] = old_ast.root;
    }

    // Phase 2b: recovery — under matched parents, pair unmatched children
    // of equal type positionally (repeat until stable to chase down chains).
    bool changed = true;
    while (changed) {
        changed = false;
        for (int o = 0; o < n_old; ++o) {
            int n = diff.old_to_new[o];
            if (n == -1) continue;
            const auto& co = old_ast.at(o).children;
            const auto& cn = new_ast.at(n).children;
            std::size_t j = 0;
            for (int oc : co) {
                if (diff.old_to_new[oc] != -1) continue;
                while (j < cn.size()) {
                    int nc = cn[j];
                    ++j;
                    if (diff.new_to_old[nc] != -1) continue;
                    if (new_ast.at(nc).type != old_ast.at(oc).type) continue;
                    diff.old_to_new[oc] = nc;
                    diff.new_to_old[nc] = oc;
                    changed = true;
                    break;
                }
            }
        }
    }

    // Labels.
    diff.old_labels.assign(n_old, NodeOp::Del);
    diff.new_labels.assign(n_new, NodeOp::Insert);
    for (int o = 0; o < n_old; ++o) {
        int n = diff.old_to_new[o];
        if (n == -1) continue;
        NodeOp op = (old_ast.at(o).value == new_ast.at(n).value)
                        ? NodeOp::Keep
                        : NodeOp::Update;
        diff.old_labels[o] = op;
        diff.new_labels[n] = op;
    }
    return diff;
}

}  // namespace comet
