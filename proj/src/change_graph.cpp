#include "comet/change_graph.hpp"

#include <functional>
#include <map>

namespace comet {

const char* node_origin_name(NodeOrigin origin) {
    switch (origin) {
        case NodeOrigin::OldVersion: return "old";
        case NodeOrigin::NewVersion: return "new";
        case NodeOrigin::Both: return "both";
    }
    return "?";
}

namespace {

std::vector<int> parents(const Ast& ast) {
    std::vector<int> parent(ast.nodes.size(), -1);
    for (std::size_t id = 0; id < ast.nodes.size(); ++id)
        for (int c : ast.at(id).children) parent[c] = static_cast<int>(id);
    return parent;
}

// The syntactic context a SimpleName occurs in; used as the change-graph
// node type and, downstream, for the coarse type-class features.
NodeType context_type(const Ast& ast, const std::vector<int>& parent, int id) {
    int cur = parent[id];
    while (cur != -1) {
        NodeType t = ast.at(cur).type;
        switch (t) {
            case NodeType::Parameter:
            case NodeType::VariableDeclaration:
            case NodeType::IfStatement:
            case NodeType::WhileStatement:
            case NodeType::ForStatement:
            case NodeType::ReturnStatement:
            case NodeType::Assignment:
            case NodeType::MethodInvocation:
            case NodeType::ContainerAccess:
            case NodeType::InfixExpression:
            case NodeType::PrefixExpression:
            case NodeType::PostfixExpression:
            case NodeType::FieldAccess:
            case NodeType::MethodDeclaration:
                return t;
            default:
                cur = parent[cur];
        }
    }
    return NodeType::SimpleName;
}

void force_unit(const Ast& ast, std::vector<int>& unit, int id, int u) {
    unit[id] = u;
    for (int c : ast.at(id).children) force_unit(ast, unit, c, u);
}

void assign_units(const Ast& ast, std::vector<int>& unit, int id, int inherited) {
    const AstNode& n = ast.at(id);
    switch (n.type) {
        case NodeType::MethodDeclaration: {
            unit[id] = id;
            for (std::size_t k = 0; k + 1 < n.children.size(); ++k)
                force_unit(ast, unit, n.children[k], id);
            if (!n.children.empty())
                assign_units(ast, unit, n.children.back(), id);
            break;
        }
        case NodeType::IfStatement: {
            unit[id] = id;
            force_unit(ast, unit, n.children[0], id);
            for (std::size_t k = 1; k < n.children.size(); ++k)
                assign_units(ast, unit, n.children[k], id);
            break;
        }
        case NodeType::WhileStatement: {
            unit[id] = id;
            force_unit(ast, unit, n.children[0], id);
            assign_units(ast, unit, n.children[1], id);
            break;
        }
        case NodeType::ForStatement: {
            unit[id] = id;
            force_unit(ast, unit, n.children[0], id);
            force_unit(ast, unit, n.children[1], id);
            force_unit(ast, unit, n.children[2], id);
            assign_units(ast, unit, n.children[3], id);
            break;
        }
        case NodeType::ExpressionStatement:
        case NodeType::ReturnStatement:
        case NodeType::VariableDeclaration:
            force_unit(ast, unit, id, id);
            break;
        case NodeType::Block:
            unit[id] = inherited;
            for (int c : n.children) assign_units(ast, unit, c, inherited);
            break;
        default:
            force_unit(ast, unit, id, inherited);
            break;
    }
}

// Units whose subtree contains any non-keep node.
std::set<int> changed_units(const Ast& ast, const std::vector<int>& unit,
                            const std::vector<NodeOp>& labels) {
    std::set<int> out;
    for (std::size_t id = 0; id < ast.nodes.size(); ++id)
        if (labels[id] != NodeOp::Keep) out.insert(unit[id]);
    return out;
}

// All SimpleNames in a subtree, preorder.
void collect_names(const Ast& ast, int id, std::vector<int>& out) {
    if (ast.at(id).type == NodeType::SimpleName) out.push_back(id);
    for (int c : ast.at(id).children) collect_names(ast, c, out);
}

}  // namespace

std::vector<int> statement_units(const Ast& ast) {
    std::vector<int> unit(ast.nodes.size(), -1);
    if (ast.empty()) return unit;
    assign_units(ast, unit, ast.root, ast.root);
    return unit;
}

ChangeGraph build_change_graph(const Ast& old_ast, const Ast& new_ast,
                               const TreeDiff& diff) {
    ChangeGraph graph;
    auto old_parent = parents(old_ast);
    auto new_parent = parents(new_ast);

    std::map<int, int> old_to_graph;
    std::map<int, int> new_to_graph;

    for (std::size_t id = 0; id < old_ast.nodes.size(); ++id) {
        if (old_ast.at(id).type != NodeType::SimpleName) continue;
        ChangeGraphNode node;
        node.old_ast_node = static_cast<int>(id);
        node.node_type =
            context_type(old_ast, old_parent, static_cast<int>(id));
        int partner = diff.old_to_new[id];
        if (partner != -1) {
            node.operation = diff.old_labels[id];
            node.origin = NodeOrigin::Both;
            node.value = new_ast.at(partner).value;
            if (old_ast.at(id).value != node.value)
                node.old_value = old_ast.at(id).value;
            node.new_ast_node = partner;
            new_to_graph[partner] = static_cast<int>(graph.nodes.size());
        } else {
            node.operation = NodeOp::Del;
            node.origin = NodeOrigin::OldVersion;
            node.value = old_ast.at(id).value;
        }
        node.source_order = static_cast<int>(graph.nodes.size());
        old_to_graph[static_cast<int>(id)] =
            static_cast<int>(graph.nodes.size());
        graph.nodes.push_back(std::move(node));
    }
    for (std::size_t id = 0; id < new_ast.nodes.size(); ++id) {
        if (new_ast.at(id).type != NodeType::SimpleName) continue;
        if (diff.new_to_old[id] != -1) continue;
        ChangeGraphNode node;
        node.operation = NodeOp::Insert;
        node.origin = NodeOrigin::NewVersion;
        node.value = new_ast.at(id).value;
        node.new_ast_node = static_cast<int>(id);
        node.node_type =
            context_type(new_ast, new_parent, static_cast<int>(id));
        node.source_order = static_cast<int>(graph.nodes.size());
        new_to_graph[static_cast<int>(id)] =
            static_cast<int>(graph.nodes.size());
        graph.nodes.push_back(std::move(node));
    }

    const int n = static_cast<int>(graph.nodes.size());

    // A: reflexive...
    for (int i = 0; i < n; ++i) graph.relation_set.emplace(i, i);
    // ... same-value ...
    std::map<std::string, std::vector<int>> by_value;
    for (int i = 0; i < n; ++i) by_value[graph.nodes[i].value].push_back(i);
    for (const auto& [value, ids] : by_value) {
        (void)value;
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b) {
                graph.relation_set.emplace(ids[a], ids[b]);
                graph.relation_set.emplace(ids[b], ids[a]);
            }
    }
    // ... and assignment pairs (declarations with initializers included).
    auto add_assignment_pairs = [&](const Ast& ast,
                                    const std::map<int, int>& to_graph) {
        for (std::size_t id = 0; id < ast.nodes.size(); ++id) {
            const AstNode& node = ast.at(id);
            bool is_assign = node.type == NodeType::Assignment;
            bool is_decl_init = node.type == NodeType::VariableDeclaration &&
                                node.children.size() >= 2;
            if (!is_assign && !is_decl_init) continue;
            std::vector<int> lhs, rhs;
            collect_names(ast, node.children[0], lhs);
            for (std::size_t k = 1; k < node.children.size(); ++k)
                collect_names(ast, node.children[k], rhs);
            for (int l : lhs)
                for (int r : rhs) {
                    auto li = to_graph.find(l);
                    auto ri = to_graph.find(r);
                    if (li == to_graph.end() || ri == to_graph.end()) continue;
                    graph.relation_set.emplace(li->second, ri->second);
                    graph.relation_set.emplace(ri->second, li->second);
                }
        }
    };
    add_assignment_pairs(old_ast, old_to_graph);
    add_assignment_pairs(new_ast, new_to_graph);

    // CN: non-keep nodes, widened to whole statement units containing any
    // change so that context tokens around an edit stay visible.
    auto old_units = statement_units(old_ast);
    auto new_units = statement_units(new_ast);
    auto old_changed = changed_units(old_ast, old_units, diff.old_labels);
    auto new_changed = changed_units(new_ast, new_units, diff.new_labels);

    for (int i = 0; i < n; ++i) {
        const ChangeGraphNode& node = graph.nodes[i];
        if (node.operation != NodeOp::Keep) {
            graph.changed_set.insert(i);
            continue;
        }
        if (node.old_ast_node != -1 &&
            old_changed.count(old_units[node.old_ast_node]))
            graph.changed_set.insert(i);
        else if (node.new_ast_node != -1 &&
                 new_changed.count(new_units[node.new_ast_node]))
            graph.changed_set.insert(i);
    }
    return graph;
}

}  // namespace comet
