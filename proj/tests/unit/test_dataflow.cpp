#include "doctest.h"

#include <random>

#include "comet/ast.hpp"
#include "comet/change_graph.hpp"
#include "comet/dataflow.hpp"
#include "comet/tree_diff.hpp"
#include "support/dataflow_oracle.hpp"
#include "support/generators.hpp"

using namespace comet;

namespace {

// Reconstruction of the two-parameter compare method whose variable
// occurrences land on the indices the flow-analysis walkthrough uses
// (params a,b then max,b | min | a,b | max | min,b | min,a | min,max |
// min | max | min).
const char* kCompareSource = R"(int compare(int a, int b) {
    int max = b;
    int min = 0;
    if (a > b) {
        max++;
        min = b;
    } else {
        min = a;
    }
    while (min < max) {
        min++;
        max--;
    }
    return min;
})";

struct Occ {
    std::string name;
    int ast_node;
};

std::vector<Occ> simple_names(const Ast& ast) {
    std::vector<Occ> out;
    for (std::size_t i = 0; i < ast.nodes.size(); ++i)
        if (ast.at(i).type == NodeType::SimpleName)
            out.push_back({ast.at(i).value, static_cast<int>(i)});
    return out;
}

}  // namespace

TEST_CASE("classify: parameters are outputs, infix operands inputs") {
    Ast ast = parse_java_subset(
        "int compare(int a, int b) { if (a > b) return a; return b; }");
    auto occs = classify_flow_occurrences(ast);
    REQUIRE(occs.size() >= 2);
    CHECK(occs[0].name == "a");
    CHECK(occs[0].pattern == FlowPattern::MethodParameter);
    CHECK(occs[0].direction == FlowDirection::Output);
    CHECK(occs[1].name == "b");
    CHECK(occs[1].direction == FlowDirection::Output);

    bool a_infix_input = false, b_infix_input = false;
    for (const auto& o : occs) {
        if (o.pattern == FlowPattern::InfixExpression &&
            o.direction == FlowDirection::Input) {
            if (o.name == "a") a_infix_input = true;
            if (o.name == "b") b_infix_input = true;
        }
    }
    CHECK(a_infix_input);
    CHECK(b_infix_input);
}

TEST_CASE("classify: method with no variables yields nothing") {
    Ast ast = parse_java_subset("void f() { return; }");
    CHECK(classify_flow_occurrences(ast).empty());
}

TEST_CASE("classify: postfix variables occur as input then output") {
    Ast ast = parse_java_subset("void f(int i) { i++; }");
    auto occs = classify_flow_occurrences(ast);
    REQUIRE(occs.size() == 3);
    CHECK(occs[1].direction == FlowDirection::Input);
    CHECK(occs[1].pattern == FlowPattern::PostfixExpression);
    CHECK(occs[2].direction == FlowDirection::Output);
    CHECK(occs[2].pattern == FlowPattern::PostfixExpression);
    CHECK(occs[1].ast_node == occs[2].ast_node);
}

TEST_CASE("classify: preservation drops bare occurrences") {
    // a bare name as an if condition matches no extraction rule, so flag
    // only occurs as the parameter output
    Ast ast = parse_java_subset("void f(boolean flag) { if (flag) { g(); } }");
    for (const auto& o : classify_flow_occurrences(ast))
        if (o.name == "flag")
            CHECK(o.pattern == FlowPattern::MethodParameter);
}

TEST_CASE("link_flows straight-line chain") {
    Ast ast = parse_java_subset("void f() { int x = 1; int y = x; int z = y; }");
    auto result = analyze_flows(ast);
    auto occs = simple_names(ast);
    // occs[0] is the method name; then x(decl), y(decl), x(use), z(decl),
    // y(use). Expect x(decl)->x(use), y(decl)->y(use), rhs->lhs per decl.
    REQUIRE(occs.size() == 6);
    int x_decl = occs[1].ast_node;
    int y_decl = occs[2].ast_node;
    int x_use = occs[3].ast_node;
    int z_decl = occs[4].ast_node;
    int y_use = occs[5].ast_node;
    CHECK(result.edges.count({x_decl, x_use}) == 1);
    CHECK(result.edges.count({y_decl, y_use}) == 1);
    CHECK(result.edges.count({x_use, y_decl}) == 1);
    CHECK(result.edges.count({y_use, z_decl}) == 1);
    CHECK(result.edges.size() == 4);
}

TEST_CASE("use before any definition has no incoming edge") {
    Ast ast = parse_java_subset("void f() { y = x + 1; }");
    auto result = analyze_flows(ast);
    auto occs = simple_names(ast);
    REQUIRE(occs[2].name == "x");
    int x_use = occs[2].ast_node;
    for (const auto& [from, to] : result.edges) CHECK(to != x_use);
}

TEST_CASE("flow edges on the compare example match the walkthrough") {
    Ast ast = parse_java_subset(kCompareSource);
    auto occs = simple_names(ast);
    // occurrence 0 is the method name; the walkthrough's superscripts follow
    // by shifting one: a^0 -> occs[1], a^5 -> occs[6], min^{4,8,10,12,14,16}
    // -> occs[5,9,11,13,15,17].
    REQUIRE(occs.size() == 18);
    CHECK(occs[0].name == "compare");
    CHECK(occs[1].name == "a");
    CHECK(occs[6].name == "a");
    std::vector<int> min_positions;
    for (std::size_t i = 0; i < occs.size(); ++i)
        if (occs[i].name == "min") min_positions.push_back(static_cast<int>(i));
    CHECK(min_positions == std::vector<int>{5, 9, 11, 13, 15, 17});

    auto result = analyze_flows(ast);
    auto& E = result.edges;
    // a^0 -> a^5
    CHECK(E.count({occs[1].ast_node, occs[6].ast_node}) == 1);
    // min^16 draws from min^8, min^10 and min^14, and not from min^4
    int min16 = occs[17].ast_node;
    CHECK(E.count({occs[9].ast_node, min16}) == 1);
    CHECK(E.count({occs[11].ast_node, min16}) == 1);
    CHECK(E.count({occs[15].ast_node, min16}) == 1);
    CHECK(E.count({occs[5].ast_node, min16}) == 0);
}

TEST_CASE("optimism: an output inside an if feeds later inputs") {
    Ast ast = parse_java_subset(
        "void f(int c) { int x = 1; if (c > 0) { x = 2; } int y = x; }");
    auto result = analyze_flows(ast);
    auto occs = simple_names(ast);
    // occs: f, c, x(init), c(cond), x(branch), y(decl), x(use)
    REQUIRE(occs.size() == 7);
    REQUIRE(occs[6].name == "x");
    int x_init = occs[2].ast_node;
    int x_branch = occs[4].ast_node;
    int x_use = occs[6].ast_node;
    CHECK(result.edges.count({x_init, x_use}) == 1);
    CHECK(result.edges.count({x_branch, x_use}) == 1);
}

TEST_CASE("loops contribute no back edges") {
    Ast ast = parse_java_subset(
        "void f(int n) { int s = 0; while (s < n) { s = s + 1; } }");
    auto result = analyze_flows(ast);
    auto occs = simple_names(ast);
    // the s inside the condition reads only the initial def (no back edge
    // from the body's redefinition)
    int s_init = occs[2].ast_node;
    int s_cond = occs[3].ast_node;
    int s_body_def = occs[5].ast_node;
    REQUIRE(occs[3].name == "s");
    CHECK(result.edges.count({s_init, s_cond}) == 1);
    CHECK(result.edges.count({s_body_def, s_cond}) == 0);
}

TEST_CASE("nearest-definition holds literally on straight-line code") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 60; ++trial) {
        // straight-line only: declarations, assignments, postfix, return
        std::string src = "int f(int a, int b) {\n";
        std::mt19937_64 local(rng());
        std::uniform_int_distribution<int> n_stmt(1, 8);
        std::uniform_int_distribution<int> kind(0, 2);
        int n = n_stmt(local);
        std::vector<std::string> vars{"a", "b"};
        for (int i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
            switch (kind(local)) {
                case 0: {
                    std::string v = "v" + std::to_string(i);
                    src += "  int " + v + " = " + vars[pick(local)] + " + 1;\n";
                    vars.push_back(v);
                    break;
                }
                case 1:
                    src += "  " + vars[pick(local)] + " = " +
                           vars[pick(local)] + " * 2;\n";
                    break;
                default:
                    src += "  " + vars[pick(local)] + "++;\n";
                    break;
            }
        }
        src += "  return a + b;\n}\n";
        Ast ast = parse_java_subset(src);
        auto result = analyze_flows(ast);

        // for every def->use edge on name v, no output occurrence of v is
        // evaluated strictly between the def and the use (assignments read
        // their right side before writing, so evaluation order is the
        // occurrence emission order)
        const std::vector<FlowOccurrence>& occs = result.occurrences;
        auto emission_index = [&](int node, FlowDirection d) {
            for (std::size_t k = 0; k < occs.size(); ++k)
                if (occs[k].ast_node == node && occs[k].direction == d)
                    return static_cast<long>(k);
            return -1L;
        };
        for (const auto& [def, use] : result.edges) {
            long use_at = emission_index(use, FlowDirection::Input);
            if (use_at < 0) continue;  // rhs->lhs edge onto a pure output
            long def_at = emission_index(def, FlowDirection::Output);
            REQUIRE(def_at >= 0);
            if (def_at > use_at) continue;  // same-node rhs->lhs pairs
            const std::string& name = ast.at(def).value;
            for (long k = def_at + 1; k < use_at; ++k) {
                if (occs[k].name != name) continue;
                CHECK(occs[k].direction != FlowDirection::Output);
            }
        }
    }
}

TEST_CASE("analysis equals the brute-force path oracle") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 80; ++trial) {
        std::string src = comet::testing::random_method_source(rng, 12);
        Ast ast = parse_java_subset(src);
        auto got = analyze_flows(ast).edges;
        auto want = comet::testing::oracle_flow_edges(ast);
        CHECK(got == want);
    }
}

TEST_CASE("build_dependency_graph re-indexes and unions both versions") {
    Ast a = parse_java_subset("int f(int x) { int y = x; return y; }");
    TreeDiff same = tree_diff(a, a);
    ChangeGraph graph = build_change_graph(a, a, same);
    DependencyGraph deps = build_dependency_graph(a, a, graph);

    // same analysis duplicated per version collapses to one edge set
    auto single = analyze_flows(a).edges;
    CHECK(deps.edges.size() == single.size());
    for (const auto& [from, to] : deps.edges) {
        CHECK(from >= 0);
        CHECK(to < static_cast<int>(graph.size()));
    }
}

TEST_CASE("dependency edges connect nodes of the same version") {
    Ast a = parse_java_subset("void f() { int x = 1; int y = x; }");
    Ast b = parse_java_subset("void f() { int x = 1; int z = x; int y = z; }");
    TreeDiff diff = tree_diff(a, b);
    ChangeGraph graph = build_change_graph(a, b, diff);
    DependencyGraph deps = build_dependency_graph(a, b, graph);
    for (const auto& [from, to] : deps.edges) {
        const auto& nf = graph.nodes[from];
        const auto& nt = graph.nodes[to];
        bool share_old = nf.old_ast_node != -1 && nt.old_ast_node != -1;
        bool share_new = nf.new_ast_node != -1 && nt.new_ast_node != -1;
        CHECK((share_old || share_new));
    }
}
