#pragma once

#include <cstddef>
#include <vector>

#include "falcon/graph.hpp"
#include "falcon/tensor_io.hpp"

namespace falcon {

// Soft cluster membership: assignment is N x K row-major with rows on the
// probability simplex, aux holds the K per-cluster auxiliary multipliers.
struct SoftAssignment {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<double> assignment;
    std::vector<double> aux;

    double at(std::size_t i, std::size_t c) const { return assignment[i * k + c]; }
    double& at(std::size_t i, std::size_t c) { return assignment[i * k + c]; }
};

struct SolveReport {
    std::size_t iterations_run = 0;
    std::vector<double> objective_trace;
    bool converged = false;
};

struct SolveResult {
    SoftAssignment assignment;
    SolveReport report;
};

// Surrogate objective of the fractional program: for each cluster column x_k
// with Rayleigh quotient r_k = x_k^T W x_k / x_k^T D x_k (zero when the
// weighted volume is zero), the term 2*aux_k*sqrt(r_k) - aux_k^2, summed over
// clusters. Completing the square shows each term is maximized over aux_k at
// aux_k = sqrt(r_k), where the sum equals the sum of Rayleigh quotients.
double fqt_objective(const AffinityGraph& graph, const SoftAssignment& asg);

// Closed-form maximizer of the surrogate in aux: sqrt(x_k^T W x_k / x_k^T D x_k).
// A cluster whose weighted volume is <= epsilon has no finite maximizer.
SoftAssignment update_aux(const AffinityGraph& graph, const SoftAssignment& asg,
                          double epsilon = 0.0);

// Synchronous mirror-ascent reassignment: every row i becomes a softmax over
// log X_ik + gain_ik / temperature, where gain_ik is the affinity mass node i
// sends to cluster k divided by the cluster's weighted volume, scaled by
// aux_k. Equivalently the old row reweighted by exp(gain / temperature);
// temperature is the inverse step size. The epsilon keeps empty-cluster
// denominators finite.
SoftAssignment update_assignment(const AffinityGraph& graph, const SoftAssignment& asg,
                                 double temperature, double epsilon);

// Shrinks every edge by exp(-(1-cos)^2/beta) where cos compares the two
// endpoints' assignment rows. Degrees are recomputed.
AffinityGraph reweight_graph(const AffinityGraph& graph, const SoftAssignment& asg, double beta);

// Seeded initialization followed by t_cuts rounds of aux update, assignment
// update and (when beta_reweight > 0) reweighting. Terminates early when the
// Rayleigh objective measured on the input graph stagnates in relative terms
// and the hardened labeling already uses every cluster; otherwise runs all
// t_cuts rounds.
SolveResult solve(const AffinityGraph& graph, const PipelineConfig& config);

} // namespace falcon
