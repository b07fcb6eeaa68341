#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "falcon/tensor_io.hpp"

namespace falcon {

// Symmetric nonnegative affinity matrix with cached row sums. Degrees are
// maintained by the constructors and by every operation that edits weights.
struct AffinityGraph {
    std::size_t n = 0;
    std::vector<double> weights; // n*n row-major
    std::vector<double> degrees; // n

    double weight(std::size_t i, std::size_t j) const { return weights[i * n + j]; }
    double& weight(std::size_t i, std::size_t j) { return weights[i * n + j]; }
};

// Wraps an explicit weight matrix; validates symmetry, nonnegativity and
// finiteness, then computes degrees.
AffinityGraph graph_from_weights(std::size_t n, std::vector<double> weights);

// Recomputes cached degrees from the weight matrix in place.
void recompute_degrees(AffinityGraph& graph);

// Builds the regularized affinity matrix of a token feature matrix (N x d):
// inner products, global min-max rescale, elementwise power, then a diagonal
// boost of lambda times the pre-regularization row sums.
AffinityGraph build_affinity(const Tensor& features, double alpha_power, double lambda_affinity);

// x^T (D - W) x, clamped so roundoff cannot leak a negative value.
double laplacian_quadratic(const AffinityGraph& graph, std::span<const double> x);

} // namespace falcon
