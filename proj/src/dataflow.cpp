#include "comet/dataflow.hpp"

#include <map>
#include <optional>

namespace comet {

const char* flow_pattern_name(FlowPattern pattern) {
    switch (pattern) {
        case FlowPattern::MethodParameter: return "MethodParameter";
        case FlowPattern::PostfixExpression: return "PostfixExpression";
        case FlowPattern::AssignmentLeft: return "Assignment(left-hand)";
        case FlowPattern::PrefixExpression: return "PrefixExpression";
        case FlowPattern::InfixExpression: return "InfixExpression";
        case FlowPattern::ContainerAccess: return "ContainerAccess";
        case FlowPattern::MethodInvocation: return "MethodInvocation";
        case FlowPattern::ReturnStatement: return "ReturnStatement";
        case FlowPattern::AssignmentRight: return "Assignment(right-hand)";
    }
    return "?";
}

FlowDirection pattern_direction(FlowPattern pattern) {
    switch (pattern) {
        case FlowPattern::MethodParameter:
        case FlowPattern::AssignmentLeft:
            return FlowDirection::Output;
        default:
            return FlowDirection::Input;
    }
}

namespace {

using DefState = std::map<std::string, std::set<int>>;

void merge_into(DefState& into, const DefState& other) {
    for (const auto& [name, defs] : other)
        into[name].insert(defs.begin(), defs.end());
}

// Emits classified occurrences in evaluation order and, when linking,
// maintains optimistic reaching definitions.
class FlowWalker {
public:
    explicit FlowWalker(const Ast& ast, bool link) : ast_(ast), link_(link) {}

    std::vector<FlowOccurrence> occurrences;
    std::set<std::pair<int, int>> edges;

    void run() {
        if (ast_.empty()) return;
        DefState state;
        const AstNode& root = ast_.at(ast_.root);
        if (root.type == NodeType::MethodDeclaration) {
            for (int c : root.children) {
                if (ast_.at(c).type != NodeType::Parameter) continue;
                emit_output(ast_.at(c).children[0],
                            FlowPattern::MethodParameter, state);
            }
            if (!root.children.empty())
                walk_stmt(root.children.back(), state);
        } else {
            walk_stmt(ast_.root, state);
        }
    }

private:
    const Ast& ast_;
    bool link_;

    void emit_input(int name_id, FlowPattern pattern, DefState& state) {
        const std::string& name = ast_.at(name_id).value;
        FlowOccurrence occ;
        occ.ast_node = name_id;
        occ.name = name;
        occ.direction = FlowDirection::Input;
        occ.pattern = pattern;
        occurrences.push_back(std::move(occ));
        if (link_) {
            auto it = state.find(name);
            if (it != state.end())
                for (int def : it->second) edges.emplace(def, name_id);
        }
    }

    void emit_output(int name_id, FlowPattern pattern, DefState& state,
                     int assignment_id = -1) {
        const std::string& name = ast_.at(name_id).value;
        FlowOccurrence occ;
        occ.ast_node = name_id;
        occ.name = name;
        occ.direction = FlowDirection::Output;
        occ.pattern = pattern;
        occ.assignment_id = assignment_id;
        occ.assignment_left = assignment_id != -1;
        occurrences.push_back(std::move(occ));
        if (link_) state[name] = {name_id};
    }

    // Expression walk in evaluation order. `context` names the innermost
    // input rule governing plain variables here; nullopt means a bare
    // occurrence falls into the preservation set and is dropped.
    void walk_expr(int id, DefState& state,
                   std::optional<FlowPattern> context = std::nullopt) {
        const AstNode& n = ast_.at(id);
        switch (n.type) {
            case NodeType::SimpleName:
                if (context) emit_input(id, *context, state);
                break;
            case NodeType::Literal:
            case NodeType::ExpressionStatement:  // opaque leaf
                break;
            case NodeType::InfixExpression:
                for (int c : n.children)
                    walk_expr(c, state, FlowPattern::InfixExpression);
                break;
            case NodeType::PrefixExpression:
                for (int c : n.children)
                    walk_expr(c, state, FlowPattern::PrefixExpression);
                break;
            case NodeType::PostfixExpression: {
                // e++ reads then writes every variable of e
                std::vector<int> vars;
                collect_vars(n.children[0], vars);
                for (int v : vars)
                    emit_input(v, FlowPattern::PostfixExpression, state);
                for (int v : vars)
                    emit_output(v, FlowPattern::PostfixExpression, state);
                break;
            }
            case NodeType::MethodInvocation:
                for (int c : n.children)
                    walk_expr(c, state, FlowPattern::MethodInvocation);
                break;
            case NodeType::ContainerAccess:
                for (int c : n.children)
                    walk_expr(c, state, FlowPattern::ContainerAccess);
                break;
            case NodeType::FieldAccess:
                for (int c : n.children) walk_expr(c, state, context);
                break;
            case NodeType::Assignment:
                walk_assignment(id, state);
                break;
            default:
                for (int c : n.children) walk_expr(c, state, context);
                break;
        }
    }

    void collect_vars(int id, std::vector<int>& out) const {
        const AstNode& n = ast_.at(id);
        if (n.type == NodeType::SimpleName) {
            out.push_back(id);
            return;
        }
        if (n.type == NodeType::Literal || n.type == NodeType::ExpressionStatement)
            return;
        for (int c : n.children) collect_vars(c, out);
    }

    void emit_assignment(int id, int rhs, const std::vector<int>& lhs_vars,
                         int lhs_read_root, DefState& state) {
        std::size_t r0 = occurrences.size();
        walk_expr(rhs, state, FlowPattern::AssignmentRight);
        std::size_t r1 = occurrences.size();
        for (std::size_t k = r0; k < r1; ++k)
            occurrences[k].rhs_of.push_back(id);

        // Reads inside a structured lhs (v[e] = ...) precede the write.
        if (lhs_read_root != -1)
            walk_expr(lhs_read_root, state, FlowPattern::ContainerAccess);
        for (int v : lhs_vars)
            emit_output(v, FlowPattern::AssignmentLeft, state, id);

        if (link_) {
            for (std::size_t k = r0; k < r1; ++k)
                for (int l : lhs_vars)
                    edges.emplace(occurrences[k].ast_node, l);
        }
    }

    void walk_assignment(int id, DefState& state) {
        const AstNode& n = ast_.at(id);
        int lhs = n.children[0];
        int rhs = n.children[1];
        std::vector<int> lhs_vars;
        collect_vars(lhs, lhs_vars);
        bool structured = ast_.at(lhs).type != NodeType::SimpleName;
        emit_assignment(id, rhs, lhs_vars, structured ? lhs : -1, state);
    }

    // A declaration with an initializer behaves like an assignment.
    void walk_declaration(int id, DefState& state) {
        const AstNode& n = ast_.at(id);
        if (n.children.size() < 2) return;  // bare declaration: no flow
        emit_assignment(id, n.children[1], {n.children[0]}, -1, state);
    }

    void walk_stmt(int id, DefState& state) {
        const AstNode& n = ast_.at(id);
        switch (n.type) {
            case NodeType::Block:
                for (int c : n.children) walk_stmt(c, state);
                break;
            case NodeType::VariableDeclaration:
                walk_declaration(id, state);
                break;
            case NodeType::ExpressionStatement:
                for (int c : n.children) walk_expr(c, state);
                break;
            case NodeType::ReturnStatement:
                for (int c : n.children)
                    walk_expr(c, state, FlowPattern::ReturnStatement);
                break;
            case NodeType::IfStatement: {
                walk_expr(n.children[0], state);
                DefState then_state = state;
                walk_stmt(n.children[1], then_state);
                if (n.children.size() > 2) {
                    DefState else_state = std::move(state);
                    walk_stmt(n.children[2], else_state);
                    state = std::move(then_state);
                    merge_into(state, else_state);
                } else {
                    merge_into(state, then_state);
                }
                break;
            }
            case NodeType::WhileStatement: {
                walk_expr(n.children[0], state);
                DefState body_state = state;
                walk_stmt(n.children[1], body_state);
                merge_into(state, body_state);
                break;
            }
            case NodeType::ForStatement: {
                for (int c : ast_.at(n.children[0]).children) {
                    if (ast_.at(c).type == NodeType::VariableDeclaration)
                        walk_declaration(c, state);
                    else
                        walk_expr(c, state);
                }
                for (int c : ast_.at(n.children[1]).children)
                    walk_expr(c, state);
                DefState body_state = state;
                walk_stmt(n.children[3], body_state);
                for (int c : ast_.at(n.children[2]).children)
                    walk_expr(c, body_state);
                merge_into(state, body_state);
                break;
            }
            default:
                walk_expr(id, state);  // for-init expressions and similar
                break;
        }
    }
};

}  // namespace

std::vector<FlowOccurrence> classify_flow_occurrences(const Ast& ast) {
    FlowWalker walker(ast, /*link=*/false);
    walker.run();
    return walker.occurrences;
}

std::set<std::pair<int, int>> link_flows(
    const std::vector<FlowOccurrence>& occurrences) {
    std::set<std::pair<int, int>> edges;
    std::map<std::string, int> latest_def;
    std::map<int, std::vector<int>> lhs_by_assign;
    std::map<int, std::vector<int>> rhs_by_assign;

    for (const FlowOccurrence& occ : occurrences) {
        if (occ.direction == FlowDirection::Input) {
            auto it = latest_def.find(occ.name);
            if (it != latest_def.end()) edges.emplace(it->second, occ.ast_node);
        } else {
            latest_def[occ.name] = occ.ast_node;
        }
        if (occ.assignment_left && occ.assignment_id != -1)
            lhs_by_assign[occ.assignment_id].push_back(occ.ast_node);
        for (int aid : occ.rhs_of) rhs_by_assign[aid].push_back(occ.ast_node);
    }
    for (const auto& [aid, rhs] : rhs_by_assign) {
        auto it = lhs_by_assign.find(aid);
        if (it == lhs_by_assign.end()) continue;
        for (int r : rhs)
            for (int l : it->second) edges.emplace(r, l);
    }
    return edges;
}

AstFlowResult analyze_flows(const Ast& ast) {
    FlowWalker walker(ast, /*link=*/true);
    walker.run();
    return AstFlowResult{std::move(walker.occurrences),
                         std::move(walker.edges)};
}

DependencyGraph build_dependency_graph(const Ast& old_ast, const Ast& new_ast,
                                       const ChangeGraph& graph) {
    std::map<int, int> old_to_graph;
    std::map<int, int> new_to_graph;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const ChangeGraphNode& n = graph.nodes[i];
        if (n.old_ast_node != -1)
            old_to_graph[n.old_ast_node] = static_cast<int>(i);
        if (n.new_ast_node != -1)
            new_to_graph[n.new_ast_node] = static_cast<int>(i);
    }

    DependencyGraph deps;
    auto add_version = [&](const Ast& ast, const std::map<int, int>& to_graph) {
        if (ast.empty()) return;
        for (const auto& [from, to] : analyze_flows(ast).edges) {
            auto fi = to_graph.find(from);
            auto ti = to_graph.find(to);
            if (fi == to_graph.end() || ti == to_graph.end())
                continue;  // occurrence without a change-graph node
            deps.edges.emplace(fi->second, ti->second);
        }
    };
    add_version(old_ast, old_to_graph);
    add_version(new_ast, new_to_graph);
    return deps;
}

}  // namespace comet
