#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "falcon/graph.hpp"

namespace falcon {

// Hard k-way node labeling with every cluster nonempty.
struct Partition {
    std::vector<int> labels;
    int k = 0;
};

// Normalized cut of a hard labeling: sum over clusters of boundary weight
// divided by cluster volume. Clusters with zero volume are skipped.
double partition_ncut(const AffinityGraph& graph, std::span<const int> labels, int k);

// Sum of within-cluster association over volume per cluster; the hard-label
// counterpart of the relaxed objective. Zero-volume clusters contribute 0.
double partition_rayleigh(const AffinityGraph& graph, std::span<const int> labels, int k);

// Global minimum by exhaustive enumeration of set partitions into exactly k
// nonempty blocks (node 0 pinned to block 0). Ties resolve to the labeling
// that enumerates first, which is the lexicographically smallest one.
std::pair<Partition, double> exact_kway_ncut(const AffinityGraph& graph, int k,
                                             int max_nodes = 12);

// Greedy baseline: recursive two-way spectral splits (sign of the second
// eigenvector of the normalized Laplacian), always splitting the remaining
// part with the largest volume, with component splits for disconnected parts.
Partition spectral_recursive_ncut(const AffinityGraph& graph, int k);

} // namespace falcon
