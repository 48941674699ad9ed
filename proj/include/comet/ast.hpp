#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "comet/token.hpp"

namespace comet {

enum class NodeType : std::uint8_t {
    MethodDeclaration,
    Parameter,
    Block,
    IfStatement,
    WhileStatement,
    ForStatement,
    ReturnStatement,
    ExpressionStatement,
    Assignment,
    InfixExpression,
    PrefixExpression,
    PostfixExpression,
    MethodInvocation,
    ContainerAccess,
    SimpleName,
    Literal,
    VariableDeclaration,
    FieldAccess,
};

const char* node_type_name(NodeType type);

// Arena node; children index into Ast::nodes. Preorder indices follow
// source order.
struct AstNode {
    NodeType type = NodeType::Block;
    std::string value;
    std::vector<int> children;
    Span span;
};

struct Ast {
    std::vector<AstNode> nodes;
    int root = -1;

    const AstNode& at(int id) const { return nodes[id]; }
    AstNode& at(int id) { return nodes[id]; }
    bool empty() const { return root < 0; }
};

// Parses a single method declaration; falls back to statement mode when
// the source does not start like one. Constructs outside the subset are
// wrapped as opaque ExpressionStatement leaves holding their token text.
// Throws ParseError (with offset) on unrecoverable input.
Ast parse_java_subset(std::string_view source);

// Preorder node ids (== sorted ids, by arena construction).
std::vector<int> preorder(const Ast& ast);

}  // namespace comet
