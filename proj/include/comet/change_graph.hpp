#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "comet/ast.hpp"
#include "comet/tree_diff.hpp"

namespace comet {

enum class NodeOrigin { OldVersion, NewVersion, Both };

// One variable node of the change graph: <Operation, Type, Value>. Type is
// the syntactic context the name occurs in (its enclosing construct), which
// is what the coarse type features build on.
struct ChangeGraphNode {
    NodeOp operation = NodeOp::Keep;
    NodeType node_type = NodeType::SimpleName;
    std::string value;                     // current (new-version) name
    std::optional<std::string> old_value;  // pre-update name when it differs
    NodeOrigin origin = NodeOrigin::Both;
    int source_order = 0;
    int old_ast_node = -1;  // SimpleName id in the old tree, when present
    int new_ast_node = -1;
};

struct ChangeGraph {
    std::vector<ChangeGraphNode> nodes;
    std::set<std::pair<int, int>> relation_set;  // A: symmetric, reflexive
    std::set<int> changed_set;                   // CN

    std::size_t size() const { return nodes.size(); }
};

// Collects SimpleName nodes (variables and method names) of both versions:
// old-version nodes first (matched ones carry origin Both), then new-only
// nodes. A holds (i,i), same-value pairs and assignment lhs/rhs pairs; CN
// holds non-keep nodes plus nodes whose statement unit contains any change.
ChangeGraph build_change_graph(const Ast& old_ast, const Ast& new_ast,
                               const TreeDiff& diff);

// Maps every node id to its statement unit (innermost enclosing statement,
// where compound statements own only their header/condition parts).
std::vector<int> statement_units(const Ast& ast);

const char* node_origin_name(NodeOrigin origin);

}  // namespace comet
