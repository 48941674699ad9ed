#pragma once

#include <vector>

#include "comet/ast.hpp"

namespace comet {

enum class NodeOp { Keep, Insert, Del, Update };

const char* node_op_name(NodeOp op);

// Per-node labels plus the old<->new matching that produced them.
struct TreeDiff {
    std::vector<NodeOp> old_labels;   // per old-node id (del for unmatched)
    std::vector<NodeOp> new_labels;   // per new-node id (insert for unmatched)
    std::vector<int> old_to_new;      // matched partner or -1
    std::vector<int> new_to_old;
};

// Two-phase matching: identical subtrees by structural hash top-down, then
// bottom-up recovery of containers (matched-children ratio >= 0.5) and of
// leaves under matched parents. A matched pair with unequal value is Update.
TreeDiff tree_diff(const Ast& old_ast, const Ast& new_ast);

}  // namespace comet
