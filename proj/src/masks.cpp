#include "comet/masks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace comet {

bool is_blocked(double value) { return value <= kNegInf / 2; }

AttentionMask change_guided_mask(const ChangeGraph& graph) {
    const std::size_t n = graph.size();
    AttentionMask mask = AttentionMask::filled(n, kNegInf);
    for (const auto& [i, j] : graph.relation_set) {
        if (graph.changed_set.count(i) || graph.changed_set.count(j))
            mask.at(i, j) = 0.0;
    }
    return mask;
}

AttentionMask dependency_mask(const DependencyGraph& deps, std::size_t n) {
    AttentionMask mask = AttentionMask::filled(n, 0.0);
    for (const auto& [i, j] : deps.edges)
        mask.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    return mask;
}

AttentionMask fuse_masks(const AttentionMask& change, const AttentionMask& dep,
                         double beta) {
    if (change.size != dep.size)
        throw std::invalid_argument("mask size mismatch");
    AttentionMask fused = change;
    for (std::size_t k = 0; k < fused.entries.size(); ++k) {
        if (is_blocked(fused.entries[k])) continue;
        fused.entries[k] += beta * dep.entries[k];
    }
    return fused;
}

std::vector<double> masked_softmax_row(const std::vector<double>& scores,
                                       const std::vector<double>& bias) {
    const std::size_t n = scores.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;

    bool any_open = false;
    for (double b : bias)
        if (!is_blocked(b)) any_open = true;
    if (!any_open) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
        return out;
    }

    double max_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (!is_blocked(bias[i])) max_v = std::max(max_v, scores[i] + bias[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_blocked(bias[i])) continue;
        out[i] = std::exp(scores[i] + bias[i] - max_v);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace comet
