#include "comet/ast.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <set>

#include "comet/error.hpp"
#include "comet/tokenize.hpp"

namespace comet {

const char* node_type_name(NodeType type) {
    switch (type) {
        case NodeType::MethodDeclaration: return "MethodDeclaration";
        case NodeType::Parameter: return "Parameter";
        case NodeType::Block: return "Block";
        case NodeType::IfStatement: return "IfStatement";
        case NodeType::WhileStatement: return "WhileStatement";
        case NodeType::ForStatement: return "ForStatement";
        case NodeType::ReturnStatement: return "ReturnStatement";
        case NodeType::ExpressionStatement: return "ExpressionStatement";
        case NodeType::Assignment: return "Assignment";
        case NodeType::InfixExpression: return "InfixExpression";
        case NodeType::PrefixExpression: return "PrefixExpression";
        case NodeType::PostfixExpression: return "PostfixExpression";
        case NodeType::MethodInvocation: return "MethodInvocation";
        case NodeType::ContainerAccess: return "ContainerAccess";
        case NodeType::SimpleName: return "SimpleName";
        case NodeType::Literal: return "Literal";
        case NodeType::VariableDeclaration: return "VariableDeclaration";
        case NodeType::FieldAccess: return "FieldAccess";
    }
    return "?";
}

std::vector<int> preorder(const Ast& ast) {
    std::vector<int> ids(ast.nodes.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ids;  // arena ids are preorder after renumbering
}

namespace {

// Rebuilds the arena so that ids follow preorder (parent before children,
// siblings left to right).
Ast renumber_preorder(Ast&& in) {
    Ast out;
    out.nodes.reserve(in.nodes.size());
    std::function<int(int)> rec = [&](int id) {
        int nid = static_cast<int>(out.nodes.size());
        out.nodes.push_back(in.nodes[id]);
        out.nodes[nid].children.clear();
        for (int c : in.nodes[id].children) {
            int nc = rec(c);
            out.nodes[nid].children.push_back(nc);
        }
        return nid;
    };
    out.root = rec(in.root);
    return out;
}

const std::set<std::string> kModifiers = {
    "public",   "private", "protected",    "static",  "final",
    "abstract", "synchronized", "native",  "strictfp", "default",
    "transient", "volatile",
};

const std::set<std::string> kStatementKeywords = {
    "if", "while", "for", "return", "try", "throw", "switch",
    "do", "break", "continue", "assert", "synchronized",
};

const std::set<std::string> kAssignOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
};

bool is_identifier(const Token& t) {
    char c = t.text.empty() ? '\0' : t.text[0];
    return t.kind == TokenKind::CodeToken &&
           (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$');
}

bool is_literal_token(const Token& t) {
    if (t.text.empty()) return false;
    char c = t.text[0];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '"' ||
           c == '\'' || t.text == "true" || t.text == "false" ||
           t.text == "null";
}

class Parser {
public:
    Parser(std::string_view source, TokenSeq tokens)
        : src_(source), toks_(std::move(tokens)) {}

    Ast parse() {
        if (toks_.empty()) throw ParseError("empty source", 0);
        std::size_t mark = pos_;
        bool method = try_method_header();
        pos_ = mark;
        if (method) {
            ast_.root = parse_method();
        } else {
            std::vector<int> stmts;
            while (!eof()) stmts.push_back(parse_statement());
            if (stmts.size() == 1) {
                ast_.root = stmts[0];
            } else {
                int blk = alloc(NodeType::Block, "", full_span());
                ast_.at(blk).children = stmts;
                ast_.root = blk;
            }
        }
        if (!eof()) throw ParseError("unexpected trailing tokens", offset());
        return renumber_preorder(std::move(ast_));
    }

private:
    std::string_view src_;
    TokenSeq toks_;
    std::size_t pos_ = 0;
    Ast ast_;

    // -- token helpers -------------------------------------------------------

    bool eof() const { return pos_ >= toks_.size(); }
    const Token& cur() const { return toks_[pos_]; }
    const std::string& text() const { return toks_[pos_].text; }
    std::size_t offset() const {
        return eof() ? src_.size() : toks_[pos_].span->begin;
    }
    bool at(const char* s) const { return !eof() && text() == s; }
    bool at_identifier() const { return !eof() && is_identifier(cur()); }
    const Token& next(std::size_t k = 1) const {
        static const Token eof_tok{"", TokenKind::CodeToken, std::nullopt};
        return pos_ + k < toks_.size() ? toks_[pos_ + k] : eof_tok;
    }
    void advance() { ++pos_; }
    void expect(const char* s) {
        if (!at(s))
            throw ParseError(std::string("expected '") + s + "'", offset());
        advance();
    }
    Span full_span() const {
        return Span{toks_.front().span->begin, toks_.back().span->end};
    }
    Span span_from(std::size_t start_tok) const {
        std::size_t last = pos_ == 0 ? 0 : pos_ - 1;
        return Span{toks_[start_tok].span->begin, toks_[last].span->end};
    }
    std::string text_range(std::size_t tok_begin, std::size_t tok_end) const {
        if (tok_begin >= tok_end) return "";
        std::string out;
        for (std::size_t k = tok_begin; k < tok_end; ++k) {
            if (!out.empty()) out.push_back(' ');
            out += toks_[k].text;
        }
        return out;
    }

    int alloc(NodeType type, std::string value, Span span) {
        ast_.nodes.push_back(AstNode{type, std::move(value), {}, span});
        return static_cast<int>(ast_.nodes.size() - 1);
    }

    // -- header --------------------------------------------------------------

    void skip_annotations_and_modifiers() {
        for (;;) {
            if (at("@")) {
                advance();
                if (at_identifier()) advance();
                if (at("(")) skip_balanced("(", ")");
                continue;
            }
            if (!eof() && kModifiers.count(text())) {
                advance();
                continue;
            }
            break;
        }
    }

    void skip_balanced(const char* open, const char* close) {
        expect(open);
        int depth = 1;
        while (!eof() && depth > 0) {
            if (at(open)) ++depth;
            else if (at(close)) --depth;
            advance();
        }
        if (depth > 0) throw ParseError("unbalanced brackets", offset());
    }

    // Dotted name with optional generics and array suffixes. Returns false
    // (cursor moved) when the cursor is not at a plausible type.
    bool try_type_ref() {
        if (!at_identifier()) return false;
        if (kStatementKeywords.count(text())) return false;
        advance();
        while (at(".") && is_identifier(next())) {
            advance();
            advance();
        }
        if (at("<")) {
            std::size_t mark = pos_;
            int depth = 1;
            advance();
            bool ok = true;
            while (!eof() && depth > 0) {
                if (at("<")) ++depth;
                else if (at(">")) --depth;
                else if (at(">>")) depth -= 2;
                else if (at(">>>")) depth -= 3;
                else if (!at_identifier() && !at(",") && !at(".") &&
                         !at("?") && !at("[") && !at("]")) {
                    ok = false;
                    break;
                }
                advance();
            }
            if (!ok || depth != 0) {
                pos_ = mark;  // '<' was a comparison
                return true;
            }
        }
        while (at("[") && next().text == "]") {
            advance();
            advance();
        }
        if (at("...")) advance();
        return true;
    }

    bool try_method_header() {
        skip_annotations_and_modifiers();
        std::size_t mark = pos_;
        if (try_type_ref() && at_identifier() && next().text == "(")
            return true;
        // Constructor form: Name ( ... ) followed by '{' or 'throws'.
        pos_ = mark;
        if (at_identifier() && next().text == "(") {
            std::size_t scan = pos_ + 1;
            int depth = 0;
            while (scan < toks_.size()) {
                const std::string& t = toks_[scan].text;
                if (t == "(") ++depth;
                else if (t == ")") {
                    if (--depth == 0) break;
                }
                ++scan;
            }
            ++scan;
            return scan < toks_.size() &&
                   (toks_[scan].text == "{" || toks_[scan].text == "throws");
        }
        return false;
    }

    int parse_method() {
        std::size_t start = pos_;
        skip_annotations_and_modifiers();
        std::size_t type_mark = pos_;
        try_type_ref();
        std::string name;
        std::size_t name_tok;
        if (at_identifier() && next().text == "(") {
            name = text();
            name_tok = pos_;
            advance();
        } else {
            pos_ = type_mark;  // constructor: the "type" was the name
            name = text();
            name_tok = pos_;
            advance();
        }
        int method = alloc(NodeType::MethodDeclaration, name, {});
        int name_node = alloc(NodeType::SimpleName, name, *toks_[name_tok].span);
        ast_.at(method).children.push_back(name_node);

        expect("(");
        while (!at(")")) {
            if (eof()) throw ParseError("unterminated parameter list", offset());
            std::size_t p_start = pos_;
            if (at("final")) advance();
            std::size_t t_begin = pos_;
            if (!try_type_ref())
                throw ParseError("expected parameter type", offset());
            std::size_t t_end = pos_;
            if (!at_identifier())
                throw ParseError("expected parameter name", offset());
            int param = alloc(NodeType::Parameter, text_range(t_begin, t_end),
                              Span{toks_[p_start].span->begin, cur().span->end});
            int pname = alloc(NodeType::SimpleName, text(), *cur().span);
            advance();
            while (at("[") && next().text == "]") {
                advance();
                advance();
            }
            ast_.at(param).children.push_back(pname);
            ast_.at(method).children.push_back(param);
            if (at(",")) advance();
        }
        expect(")");
        if (at("throws")) {
            advance();
            while (at_identifier()) {
                try_type_ref();
                if (at(",")) advance();
                else break;
            }
        }
        int body;
        if (at(";")) {
            body = alloc(NodeType::Block, "", Span{offset(), offset() + 1});
            advance();
        } else {
            body = parse_block();
        }
        ast_.at(method).children.push_back(body);
        ast_.at(method).span = span_from(start);
        return method;
    }

    // -- statements ------------------------------------------------------------

    int parse_block() {
        std::size_t start = pos_;
        expect("{");
        int blk = alloc(NodeType::Block, "", {});
        std::vector<int> stmts;
        while (!at("}")) {
            if (eof()) throw ParseError("unterminated block", offset());
            stmts.push_back(parse_statement());
        }
        expect("}");
        ast_.at(blk).children = stmts;
        ast_.at(blk).span = span_from(start);
        return blk;
    }

    int parse_statement() {
        if (at("{")) return parse_block();
        if (at(";")) {
            int node = alloc(NodeType::ExpressionStatement, "",
                             Span{offset(), offset() + 1});
            advance();
            return node;
        }
        if (at("if")) return parse_if();
        if (at("while")) return parse_while();
        if (at("for")) return parse_for();
        if (at("return")) return parse_return();
        if (!eof() && kStatementKeywords.count(text())) return parse_opaque();

        std::size_t mark = pos_;
        bool decl = looks_like_declaration();
        pos_ = mark;
        if (decl) return parse_declaration();

        std::size_t start = pos_;
        int expr = parse_expression();
        expect(";");
        int stmt = alloc(NodeType::ExpressionStatement, "", span_from(start));
        ast_.at(stmt).children.push_back(expr);
        return stmt;
    }

    bool looks_like_declaration() {
        if (!try_type_ref()) return false;
        if (!at_identifier()) return false;
        const std::string& after = next().text;
        return after == "=" || after == ";" || after == "," ||
               (after == "[" && next(2).text == "]");
    }

    int parse_declaration() {
        std::size_t start = pos_;
        std::size_t t_begin = pos_;
        try_type_ref();
        std::string type_text = text_range(t_begin, pos_);

        std::vector<int> decls;
        for (;;) {
            if (!at_identifier())
                throw ParseError("expected declarator name", offset());
            std::size_t d_start = pos_;
            int decl = alloc(NodeType::VariableDeclaration, type_text, {});
            int name = alloc(NodeType::SimpleName, text(), *cur().span);
            ast_.at(decl).children.push_back(name);
            advance();
            while (at("[") && next().text == "]") {
                advance();
                advance();
            }
            if (at("=")) {
                advance();
                {
                    int child = parse_expression();
                    ast_.at(decl).children.push_back(child);
                }
            }
            ast_.at(decl).span = span_from(d_start);
            decls.push_back(decl);
            if (at(",")) {
                advance();
                continue;
            }
            break;
        }
        expect(";");
        if (decls.size() == 1) {
            ast_.at(decls[0]).span = span_from(start);
            return decls[0];
        }
        int blk = alloc(NodeType::Block, "", span_from(start));
        ast_.at(blk).children = decls;
        return blk;
    }

    int parse_if() {
        std::size_t start = pos_;
        expect("if");
        int node = alloc(NodeType::IfStatement, "", {});
        expect("(");
        int cond = parse_expression();
        expect(")");
        int then_branch = parse_statement();
        ast_.at(node).children = {cond, then_branch};
        if (at("else")) {
            advance();
            {
                int child = parse_statement();
                ast_.at(node).children.push_back(child);
            }
        }
        ast_.at(node).span = span_from(start);
        return node;
    }

    int parse_while() {
        std::size_t start = pos_;
        expect("while");
        int node = alloc(NodeType::WhileStatement, "", {});
        expect("(");
        int cond = parse_expression();
        expect(")");
        int body = parse_statement();
        ast_.at(node).children = {cond, body};
        ast_.at(node).span = span_from(start);
        return node;
    }

    // Children layout: init Block, cond Block (0..1 exprs), update Block, body.
    int parse_for() {
        std::size_t start = pos_;
        expect("for");
        int node = alloc(NodeType::ForStatement, "", {});
        expect("(");

        int init_blk = alloc(NodeType::Block, "", Span{offset(), offset()});
        int cond_blk;
        int upd_blk;

        std::size_t mark = pos_;
        bool foreach = try_type_ref() && at_identifier() && next().text == ":";
        pos_ = mark;

        if (foreach) {
            std::size_t t_begin = pos_;
            try_type_ref();
            std::string type_text = text_range(t_begin, pos_);
            int decl = alloc(NodeType::VariableDeclaration, type_text, {});
            int name = alloc(NodeType::SimpleName, text(), *cur().span);
            advance();
            expect(":");
            int coll = parse_expression();
            ast_.at(decl).children = {name, coll};
            ast_.at(decl).span = span_from(mark);
            ast_.at(init_blk).children.push_back(decl);
            cond_blk = alloc(NodeType::Block, "", Span{offset(), offset()});
            upd_blk = alloc(NodeType::Block, "", Span{offset(), offset()});
        } else {
            if (!at(";")) {
                std::size_t m2 = pos_;
                bool decl = looks_like_declaration();
                pos_ = m2;
                if (decl) {
                    {
                        int child = parse_declaration();
                        ast_.at(init_blk).children.push_back(child);
                    }
                } else {
                    {
                        int child = parse_expression();
                        ast_.at(init_blk).children.push_back(child);
                    }
                    while (at(",")) {
                        advance();
                        {
                            int child = parse_expression();
                            ast_.at(init_blk).children.push_back(child);
                        }
                    }
                    expect(";");
                }
            } else {
                expect(";");
            }
            cond_blk = alloc(NodeType::Block, "", Span{offset(), offset()});
            if (!at(";"))
                {
                    int child = parse_expression();
                    ast_.at(cond_blk).children.push_back(child);
                }
            expect(";");
            upd_blk = alloc(NodeType::Block, "", Span{offset(), offset()});
            if (!at(")")) {
                {
                    int child = parse_expression();
                    ast_.at(upd_blk).children.push_back(child);
                }
                while (at(",")) {
                    advance();
                    {
                        int child = parse_expression();
                        ast_.at(upd_blk).children.push_back(child);
                    }
                }
            }
        }
        expect(")");
        int body = parse_statement();
        ast_.at(node).children = {init_blk, cond_blk, upd_blk, body};
        ast_.at(node).span = span_from(start);
        return node;
    }

    int parse_return() {
        std::size_t start = pos_;
        expect("return");
        int node = alloc(NodeType::ReturnStatement, "", {});
        if (!at(";")) {
            int child = parse_expression();
            ast_.at(node).children.push_back(child);
        }
        expect(";");
        ast_.at(node).span = span_from(start);
        return node;
    }

    // Consumes a construct outside the subset as one opaque leaf.
    int parse_opaque() {
        std::size_t start = pos_;
        const std::string head = text();
        if (head == "break" || head == "continue" || head == "throw" ||
            head == "assert") {
            while (!eof() && !at(";")) advance();
            if (at(";")) advance();
        } else {
            while (!eof() && !at("{")) advance();
            if (eof()) throw ParseError("expected '{'", offset());
            skip_balanced("{", "}");
            if (head == "try") {
                while (at("catch") || at("finally")) {
                    advance();
                    if (at("(")) skip_balanced("(", ")");
                    if (at("{")) skip_balanced("{", "}");
                }
            }
            if (head == "do" && at("while")) {
                advance();
                if (at("(")) skip_balanced("(", ")");
                if (at(";")) advance();
            }
        }
        return alloc(NodeType::ExpressionStatement, text_range(start, pos_),
                     span_from(start));
    }

    // -- expressions -----------------------------------------------------------

    int parse_expression() { return parse_assignment(); }

    int parse_assignment() {
        std::size_t start = pos_;
        int lhs = parse_ternary();
        if (!eof() && kAssignOps.count(text())) {
            std::string op = text();
            advance();
            int rhs = parse_assignment();
            int node = alloc(NodeType::Assignment, op, span_from(start));
            ast_.at(node).children = {lhs, rhs};
            return node;
        }
        return lhs;
    }

    int parse_ternary() {
        std::size_t start = pos_;
        int cond = parse_binary(0);
        if (at("?")) {
            advance();
            int a = parse_expression();
            expect(":");
            int b = parse_ternary();
            int node = alloc(NodeType::InfixExpression, "?:", span_from(start));
            ast_.at(node).children = {cond, a, b};
            return node;
        }
        return cond;
    }

    static int binary_level(const std::string& op) {
        if (op == "||") return 0;
        if (op == "&&") return 1;
        if (op == "|") return 2;
        if (op == "^") return 3;
        if (op == "&") return 4;
        if (op == "==" || op == "!=") return 5;
        if (op == "<" || op == ">" || op == "<=" || op == ">=" ||
            op == "instanceof")
            return 6;
        if (op == "<<" || op == ">>" || op == ">>>") return 7;
        if (op == "+" || op == "-") return 8;
        if (op == "*" || op == "/" || op == "%") return 9;
        return -1;
    }

    int parse_binary(int level) {
        if (level > 9) return parse_unary();
        std::size_t start = pos_;
        int lhs = parse_binary(level + 1);
        while (!eof() && binary_level(text()) == level) {
            std::string op = text();
            advance();
            int rhs;
            if (op == "instanceof") {
                std::size_t t_begin = pos_;
                if (!try_type_ref())
                    throw ParseError("expected type after instanceof", offset());
                rhs = alloc(NodeType::Literal, text_range(t_begin, pos_),
                            span_from(t_begin));
            } else {
                rhs = parse_binary(level + 1);
            }
            int node = alloc(NodeType::InfixExpression, op, span_from(start));
            ast_.at(node).children = {lhs, rhs};
            lhs = node;
        }
        return lhs;
    }

    int parse_unary() {
        if (at("!") || at("~") || at("+") || at("-") || at("++") || at("--")) {
            std::size_t start = pos_;
            std::string op = text();
            advance();
            int operand = parse_unary();
            int node = alloc(NodeType::PrefixExpression, op, span_from(start));
            ast_.at(node).children = {operand};
            return node;
        }
        return parse_postfix();
    }

    int parse_postfix() {
        std::size_t start = pos_;
        int expr = parse_primary();
        for (;;) {
            if (at(".") && is_identifier(next())) {
                std::string member = next(1).text;
                if (next(2).text == "(") {
                    advance();
                    advance();
                    int call = alloc(NodeType::MethodInvocation, member, {});
                    ast_.at(call).children.push_back(expr);
                    parse_call_args(call);
                    ast_.at(call).span = span_from(start);
                    expr = call;
                } else if (ast_.at(expr).type == NodeType::SimpleName) {
                    // Fold plain o.f chains into one dotted variable name.
                    advance();
                    ast_.at(expr).value += "." + member;
                    ast_.at(expr).span.end = cur().span->end;
                    advance();
                } else {
                    advance();
                    int fa = alloc(NodeType::FieldAccess, member, {});
                    ast_.at(fa).children.push_back(expr);
                    advance();
                    ast_.at(fa).span = span_from(start);
                    expr = fa;
                }
                continue;
            }
            if (at("[")) {
                advance();
                int idx = parse_expression();
                expect("]");
                int acc = alloc(NodeType::ContainerAccess, "", span_from(start));
                ast_.at(acc).children = {expr, idx};
                expr = acc;
                continue;
            }
            if (at("++") || at("--")) {
                std::string op = text();
                advance();
                int node =
                    alloc(NodeType::PostfixExpression, op, span_from(start));
                ast_.at(node).children = {expr};
                expr = node;
                continue;
            }
            break;
        }
        return expr;
    }

    void parse_call_args(int call) {
        expect("(");
        while (!at(")")) {
            if (eof()) throw ParseError("unterminated argument list", offset());
            {
                int child = parse_expression();
                ast_.at(call).children.push_back(child);
            }
            if (at(",")) advance();
        }
        expect(")");
    }

    bool at_lambda() {
        if (at_identifier() && next().text == "->") return true;
        if (!at("(")) return false;
        std::size_t scan = pos_;
        int depth = 0;
        while (scan < toks_.size()) {
            const std::string& t = toks_[scan].text;
            if (t == "(") ++depth;
            else if (t == ")") {
                if (--depth == 0) break;
            }
            ++scan;
        }
        return scan + 1 < toks_.size() && toks_[scan + 1].text == "->";
    }

    int parse_opaque_expression() {
        std::size_t start = pos_;
        if (at("(")) skip_balanced("(", ")");
        else advance();
        if (at("->")) advance();
        if (at("{")) skip_balanced("{", "}");
        else parse_skip_expr();
        return alloc(NodeType::ExpressionStatement, text_range(start, pos_),
                     span_from(start));
    }

    void parse_skip_expr() {
        int par = 0;
        while (!eof()) {
            if (at("(") || at("[")) ++par;
            else if (at(")") || at("]")) {
                if (par == 0) return;
                --par;
            } else if ((at(",") || at(";")) && par == 0) {
                return;
            }
            advance();
        }
    }

    int parse_primary() {
        if (eof()) throw ParseError("unexpected end of input", offset());
        std::size_t start = pos_;

        if (at_lambda()) return parse_opaque_expression();

        if (at("(")) {
            advance();
            int inner = parse_expression();
            expect(")");
            // Cast heuristic: "(Name) primary-start" keeps just the operand.
            if (ast_.at(inner).type == NodeType::SimpleName && !eof() &&
                (at_identifier() || at("(") || is_literal_token(cur()))) {
                return parse_unary();
            }
            return inner;
        }
        if (at("new")) return parse_new(start);
        if (is_literal_token(cur())) {
            int node = alloc(NodeType::Literal, text(), *cur().span);
            advance();
            return node;
        }
        if (at_identifier() || at("this") || at("super")) {
            int node = alloc(NodeType::SimpleName, text(), *cur().span);
            advance();
            if (at("(")) {
                std::string name = ast_.at(node).value;
                Span sp = ast_.at(node).span;
                ast_.nodes.pop_back();
                int call = alloc(NodeType::MethodInvocation, name, sp);
                parse_call_args(call);
                ast_.at(call).span = span_from(start);
                return call;
            }
            return node;
        }
        throw ParseError("unexpected token '" + text() + "'", offset());
    }

    int parse_new(std::size_t start) {
        expect("new");
        std::size_t t_begin = pos_;
        if (!try_type_ref())
            throw ParseError("expected type after new", offset());
        std::string type_text = text_range(t_begin, pos_);
        if (at("(")) {
            int call = alloc(NodeType::MethodInvocation, type_text, {});
            parse_call_args(call);
            if (at("{")) {  // anonymous class: opaque
                skip_balanced("{", "}");
                ast_.nodes.resize(call);  // call's args are call's descendants
                return alloc(NodeType::ExpressionStatement,
                             text_range(start, pos_), span_from(start));
            }
            ast_.at(call).span = span_from(start);
            return call;
        }
        if (at("[")) {
            if (next().text == "]") {  // new T[] {...}: opaque
                while (at("[") && next().text == "]") {
                    advance();
                    advance();
                }
                if (at("{")) skip_balanced("{", "}");
                return alloc(NodeType::ExpressionStatement,
                             text_range(start, pos_), span_from(start));
            }
            advance();
            int size = parse_expression();
            expect("]");
            while (at("[")) {
                advance();
                if (!at("]")) parse_expression();
                expect("]");
            }
            int node =
                alloc(NodeType::MethodInvocation, type_text, span_from(start));
            ast_.at(node).children = {size};
            return node;
        }
        throw ParseError("expected '(' or '[' after new", offset());
    }
};

}  // namespace

Ast parse_java_subset(std::string_view source) {
    TokenSeq toks;
    try {
        toks = tokenize_code(source);
    } catch (const LexError& e) {
        throw ParseError(e.what(), e.offset);
    }
    if (toks.empty()) throw ParseError("empty source", 0);
    Parser parser(source, std::move(toks));
    return parser.parse();
}

}  // namespace comet
