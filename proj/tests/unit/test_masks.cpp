#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "comet/masks.hpp"

using namespace comet;

namespace {

// small hand-built graph: 5 nodes, values picked so nodes 1 and 3 share one
ChangeGraph hand_graph() {
    ChangeGraph g;
    for (int i = 0; i < 5; ++i) {
        ChangeGraphNode n;
        n.value = (i == 1 || i == 3) ? "shared" : "v" + std::to_string(i);
        n.operation = i == 2 ? NodeOp::Update : NodeOp::Keep;
        n.source_order = i;
        g.nodes.push_back(n);
    }
    for (int i = 0; i < 5; ++i) g.relation_set.emplace(i, i);
    g.relation_set.emplace(1, 3);
    g.relation_set.emplace(3, 1);
    g.relation_set.emplace(2, 4);  // assignment-style pair
    g.relation_set.emplace(4, 2);
    g.changed_set.insert(2);
    return g;
}

ChangeGraph random_graph(std::mt19937_64& rng, int n) {
    ChangeGraph g;
    std::uniform_int_distribution<int> val(0, n / 2 + 1);
    std::uniform_int_distribution<int> op(0, 3);
    for (int i = 0; i < n; ++i) {
        ChangeGraphNode node;
        node.value = "v" + std::to_string(val(rng));
        node.operation = static_cast<NodeOp>(op(rng));
        node.source_order = i;
        if (node.operation != NodeOp::Keep) g.changed_set.insert(i);
        g.nodes.push_back(node);
    }
    for (int i = 0; i < n; ++i) g.relation_set.emplace(i, i);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int e = 0; e < n; ++e) {
        int i = pick(rng), j = pick(rng);
        g.relation_set.emplace(i, j);
        g.relation_set.emplace(j, i);
    }
    return g;
}

DependencyGraph random_deps(std::mt19937_64& rng, int n) {
    DependencyGraph d;
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int e = 0; e < n; ++e) d.edges.emplace(pick(rng), pick(rng));
    return d;
}

}  // namespace

TEST_CASE("change mask: empty CN blocks everything") {
    ChangeGraph g = hand_graph();
    g.changed_set.clear();
    AttentionMask m = change_guided_mask(g);
    for (double v : m.entries) CHECK(is_blocked(v));
}

TEST_CASE("change mask: diagonal of a changed node opens") {
    AttentionMask m = change_guided_mask(hand_graph());
    CHECK(m.at(2, 2) == 0.0);
    CHECK(is_blocked(m.at(1, 1)));  // unchanged, no changed partner
}

TEST_CASE("change mask: full predicate on the hand graph") {
    ChangeGraph g = hand_graph();
    AttentionMask m = change_guided_mask(g);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            bool related = g.relation_set.count(
                               {static_cast<int>(i), static_cast<int>(j)}) > 0;
            bool changed = g.changed_set.count(static_cast<int>(i)) ||
                           g.changed_set.count(static_cast<int>(j));
            if (related && changed)
                CHECK(m.at(i, j) == 0.0);
            else
                CHECK(is_blocked(m.at(i, j)));
        }
    // (2,4) is an assignment pair with node 2 changed
    CHECK(m.at(2, 4) == 0.0);
    CHECK(m.at(4, 2) == 0.0);
}

TEST_CASE("dependency mask is exactly adjacency") {
    DependencyGraph d;
    CHECK(dependency_mask(d, 3).entries ==
          std::vector<double>(9, 0.0));

    d.edges.emplace(0, 2);
    AttentionMask m = dependency_mask(d, 3);
    CHECK(m.at(0, 2) == 1.0);
    int ones = 0;
    for (double v : m.entries)
        if (v == 1.0) ++ones;
    CHECK(ones == 1);
}

TEST_CASE("dependency mask row sums equal out-degrees") {
    std::mt19937_64 rng(67);
    DependencyGraph d = random_deps(rng, 8);
    AttentionMask m = dependency_mask(d, 8);
    for (int i = 0; i < 8; ++i) {
        double row = 0.0;
        for (int j = 0; j < 8; ++j) row += m.at(i, j);
        int degree = 0;
        for (const auto& [from, to] : d.edges)
            if (from == i) ++degree;
        CHECK(row == doctest::Approx(degree));
    }
}

TEST_CASE("fusion: beta zero reproduces the change mask") {
    std::mt19937_64 rng(71);
    ChangeGraph g = random_graph(rng, 6);
    DependencyGraph d = random_deps(rng, 6);
    AttentionMask change = change_guided_mask(g);
    AttentionMask dep = dependency_mask(d, 6);
    AttentionMask fused = fuse_masks(change, dep, 0.0);
    CHECK(fused.entries == change.entries);
}

TEST_CASE("fusion: beta one adds dependency scores where open") {
    ChangeGraph g = hand_graph();
    DependencyGraph d;
    d.edges.emplace(2, 4);
    AttentionMask change = change_guided_mask(g);
    AttentionMask dep = dependency_mask(d, 5);
    AttentionMask fused = fuse_masks(change, dep, 1.0);
    CHECK(fused.at(2, 4) == doctest::Approx(1.0));
    CHECK(fused.at(2, 2) == doctest::Approx(0.0));
}

TEST_CASE("fusion never unblocks and rejects size mismatch") {
    std::mt19937_64 rng(73);
    ChangeGraph g = random_graph(rng, 7);
    DependencyGraph d = random_deps(rng, 7);
    AttentionMask change = change_guided_mask(g);
    AttentionMask dep = dependency_mask(d, 7);
    AttentionMask fused = fuse_masks(change, dep, 2.5);
    for (std::size_t k = 0; k < fused.entries.size(); ++k)
        CHECK(is_blocked(fused.entries[k]) == is_blocked(change.entries[k]));

    CHECK_THROWS_AS(fuse_masks(change, dependency_mask(DependencyGraph{}, 6), 1.0),
                    std::invalid_argument);
}

TEST_CASE("softmax with mask bias: blocked entries get zero weight") {
    std::vector<double> scores{0.3, -0.2, 0.9, 0.0};
    std::vector<double> bias{0.0, kNegInf, 1.0, kNegInf};
    auto w = masked_softmax_row(scores, bias);
    CHECK(w[1] == 0.0);
    CHECK(w[3] == 0.0);
    CHECK(w[0] + w[2] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("softmax with fully blocked row falls back to uniform") {
    std::vector<double> scores{1.0, 2.0, 3.0};
    std::vector<double> bias{kNegInf, kNegInf, kNegInf};
    auto w = masked_softmax_row(scores, bias);
    for (double v : w) CHECK(v == doctest::Approx(1.0 / 3));
}

TEST_CASE("increasing beta never lowers a dependent pair's weight") {
    ChangeGraph g = hand_graph();
    g.changed_set.insert(4);
    DependencyGraph d;
    d.edges.emplace(2, 4);
    AttentionMask change = change_guided_mask(g);
    AttentionMask dep = dependency_mask(d, 5);

    double prev = -1.0;
    for (double beta : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        AttentionMask fused = fuse_masks(change, dep, beta);
        std::vector<double> scores(5, 0.0);
        std::vector<double> bias(5);
        for (int j = 0; j < 5; ++j) bias[j] = fused.at(2, j);
        auto w = masked_softmax_row(scores, bias);
        CHECK(w[4] >= prev);
        prev = w[4];
    }
}

TEST_CASE("mask invariants on random graphs") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + static_cast<int>(rng() % 10);
        ChangeGraph g = random_graph(rng, n);
        DependencyGraph d = random_deps(rng, n);
        AttentionMask change = change_guided_mask(g);
        AttentionMask dep = dependency_mask(d, n);
        AttentionMask fused = fuse_masks(change, dep, 1.0);

        for (double v : change.entries)
            CHECK((v == 0.0 || is_blocked(v)));
        for (double v : dep.entries)
            CHECK((v == 0.0 || v == 1.0));

        for (int i = 0; i < n; ++i) {
            std::vector<double> scores(n, 0.25);
            std::vector<double> bias(n);
            bool any_open = false;
            for (int j = 0; j < n; ++j) {
                bias[j] = fused.at(i, j);
                if (!is_blocked(bias[j])) any_open = true;
            }
            auto w = masked_softmax_row(scores, bias);
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (any_open && is_blocked(bias[j])) CHECK(w[j] < 1e-6);
                sum += w[j];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}
