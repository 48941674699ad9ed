#pragma once

#include <cstddef>
#include <vector>

#include "comet/change_graph.hpp"
#include "comet/dataflow.hpp"

namespace comet {

// Blocked entries carry a large negative constant instead of a true
// infinity so downstream arithmetic stays finite; softmax underflows it
// to an exact zero.
inline constexpr double kNegInf = -1e9;

// Square additive-bias matrix over change-graph nodes.
struct AttentionMask {
    std::size_t size = 0;
    std::vector<double> entries;  // row-major, size*size

    double at(std::size_t i, std::size_t j) const {
        return entries[i * size + j];
    }
    double& at(std::size_t i, std::size_t j) { return entries[i * size + j]; }

    static AttentionMask filled(std::size_t n, double value) {
        return AttentionMask{n, std::vector<double>(n * n, value)};
    }
};

// M[i][j] = 0 iff (i,j) is related and either endpoint changed; blocked
// otherwise.
AttentionMask change_guided_mask(const ChangeGraph& graph);

// M[i][j] = 1 iff the dependency edge <i,j> exists.
AttentionMask dependency_mask(const DependencyGraph& deps, std::size_t n);

// change + beta * dep, with blocked entries staying blocked. Throws
// std::invalid_argument on size mismatch.
AttentionMask fuse_masks(const AttentionMask& change, const AttentionMask& dep,
                         double beta);

// Row softmax treating the mask as additive bias. Rows whose entries are
// all blocked fall back to uniform weights.
std::vector<double> masked_softmax_row(const std::vector<double>& scores,
                                       const std::vector<double>& bias);

bool is_blocked(double value);

}  // namespace comet
