#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "comet/ast.hpp"
#include "comet/change_graph.hpp"

namespace comet {

enum class FlowDirection { Output, Input };

enum class FlowPattern {
    MethodParameter,
    PostfixExpression,
    AssignmentLeft,
    PrefixExpression,
    InfixExpression,
    ContainerAccess,
    MethodInvocation,
    ReturnStatement,
    AssignmentRight,
};

const char* flow_pattern_name(FlowPattern pattern);
FlowDirection pattern_direction(FlowPattern pattern);

// One classified variable occurrence. Occurrences appear in evaluation
// order (assignment right-hand sides before their left-hand sides); a
// postfix variable contributes an Input then an Output at the same node.
struct FlowOccurrence {
    int ast_node = -1;  // SimpleName id
    std::string name;
    FlowDirection direction = FlowDirection::Input;
    FlowPattern pattern = FlowPattern::InfixExpression;
    int assignment_id = -1;        // assignment whose left operand this is
    bool assignment_left = false;
    std::vector<int> rhs_of;       // assignments whose right side holds this
};

// Table-driven classification of every SimpleName occurrence. Occurrences
// matching no rule (the preservation set) are dropped.
std::vector<FlowOccurrence> classify_flow_occurrences(const Ast& ast);

// Linear nearest-definition linking over one occurrence sequence: each
// Input gets an edge from the latest preceding Output of the same name,
// plus right-to-left-operand edges per assignment. Edges are pairs of
// SimpleName ids (def -> use).
std::set<std::pair<int, int>> link_flows(
    const std::vector<FlowOccurrence>& occurrences);

// Flow edges for a whole method: optimistic reaching definitions. Branches
// merge (a definition in either arm reaches uses after the if); loop bodies
// run zero or one time with no back edges. Equals the union of link_flows
// over all acyclic execution paths.
struct AstFlowResult {
    std::vector<FlowOccurrence> occurrences;
    std::set<std::pair<int, int>> edges;  // SimpleName id pairs, def -> use
};
AstFlowResult analyze_flows(const Ast& ast);

// Per-version dependency edges re-indexed to change-graph nodes.
struct DependencyGraph {
    std::set<std::pair<int, int>> edges;
};

DependencyGraph build_dependency_graph(const Ast& old_ast, const Ast& new_ast,
                                       const ChangeGraph& graph);

}  // namespace comet
