#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "falcon/maskgen.hpp"

namespace falcon {

// Dense rows x cols cost matrix; all entries must be finite.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> costs;

    double at(std::size_t r, std::size_t c) const { return costs[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return costs[r * cols + c]; }
};

// Optimal one-to-one assignment: min(rows, cols) disjoint (row, col) pairs
// minimizing the summed cost.
struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> assignment;
    double total_cost = 0.0;
};

// Exact minimum-cost assignment via shortest augmenting paths with dual
// potentials. Rectangular inputs are padded to square with (max entry + 1)
// and the padded pairs dropped from the result.
MatchResult hungarian_match(const CostMatrix& costs);

// Mean intersection-over-union between predicted clusters and ground-truth
// classes after optimal matching on the IoU matrix (maximized). Prediction
// labels left unmatched are merged into background_class when
// many_to_one_background is set (pass background_class = -1 for none).
// The mean runs over the ground-truth classes that actually appear.
double miou(const LabelMask& pred, const LabelMask& gt, int gt_classes,
            bool many_to_one_background, int background_class);

} // namespace falcon
