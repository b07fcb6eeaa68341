#include "falcon/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace falcon {
namespace {

void check_shapes(const AffinityGraph& graph, const SoftAssignment& asg) {
    if (asg.n != graph.n || asg.k == 0 || asg.assignment.size() != asg.n * asg.k ||
        asg.aux.size() != asg.k)
        throw Error(ErrorKind::ShapeMismatch, "assignment does not match graph");
}

// W * X, row-major N x K. The inner loop runs over contiguous assignment rows
// so the accumulation order per entry is j ascending.
std::vector<double> weighted_sums(const AffinityGraph& graph, const SoftAssignment& asg) {
    std::vector<double> wx(asg.n * asg.k, 0.0);
    for (std::size_t i = 0; i < asg.n; ++i) {
        const double* wrow = graph.weights.data() + i * graph.n;
        double* out = wx.data() + i * asg.k;
        for (std::size_t j = 0; j < asg.n; ++j) {
            double w = wrow[j];
            if (w == 0.0) continue;
            const double* xrow = asg.assignment.data() + j * asg.k;
            for (std::size_t c = 0; c < asg.k; ++c) out[c] += w * xrow[c];
        }
    }
    return wx;
}

// Per-cluster quadratic forms x_k^T W x_k (clamped at zero within roundoff)
// and x_k^T D x_k.
void cluster_forms(const AffinityGraph& graph, const SoftAssignment& asg,
                   const std::vector<double>& wx, std::vector<double>& wquad,
                   std::vector<double>& dquad) {
    wquad.assign(asg.k, 0.0);
    dquad.assign(asg.k, 0.0);
    for (std::size_t i = 0; i < asg.n; ++i) {
        const double* xrow = asg.assignment.data() + i * asg.k;
        const double* wxrow = wx.data() + i * asg.k;
        double deg = graph.degrees[i];
        for (std::size_t c = 0; c < asg.k; ++c) {
            wquad[c] += xrow[c] * wxrow[c];
            dquad[c] += deg * xrow[c] * xrow[c];
        }
    }
    for (std::size_t c = 0; c < asg.k; ++c) {
        if (!std::isfinite(wquad[c]) || !std::isfinite(dquad[c]))
            throw Error(ErrorKind::NonFiniteIntermediate, "cluster quadratic form is not finite");
        if (wquad[c] < 0.0) {
            if (wquad[c] < -1e-9 * std::max(1.0, dquad[c]))
                throw Error(ErrorKind::NonFiniteIntermediate,
                            "cluster similarity mass is negative beyond roundoff");
            wquad[c] = 0.0;
        }
    }
}

// Aux update used inside the solve loop. The ratio wquad/dquad is invariant
// to the column's scale, so a shrinking cluster keeps an honest multiplier
// for as long as it has any volume at all — this is what lets the
// reassignment step repopulate a nearly empty cluster. Only an exactly empty
// column (0/0) gets aux 0, which together with the epsilon-guarded
// denominator makes truly dead clusters inert instead of failing the run.
std::vector<double> aux_values(const AffinityGraph& graph, const SoftAssignment& asg,
                               const std::vector<double>& wx, std::vector<double>& wquad,
                               std::vector<double>& dquad) {
    cluster_forms(graph, asg, wx, wquad, dquad);
    std::vector<double> aux(asg.k, 0.0);
    for (std::size_t c = 0; c < asg.k; ++c)
        aux[c] = dquad[c] > 0.0 ? std::sqrt(wquad[c] / dquad[c]) : 0.0;
    return aux;
}

SoftAssignment assignment_step(const AffinityGraph& graph, const SoftAssignment& asg,
                               const std::vector<double>& wx, double temperature,
                               double epsilon) {
    std::vector<double> col_mass(asg.k, 0.0);
    for (std::size_t j = 0; j < asg.n; ++j) {
        const double* xrow = asg.assignment.data() + j * asg.k;
        double deg = graph.degrees[j];
        for (std::size_t c = 0; c < asg.k; ++c) col_mass[c] += xrow[c] * deg;
    }

    // Mirror-ascent step on each simplex row: the new row is the old row
    // reweighted by exp(gain / temperature) and renormalized, i.e. a softmax
    // over (log X_ik + gain_ik / temperature). Keeping the old row as a
    // factor is what makes the iteration a monotone ascent scheme: zero
    // entries stay zero and the step size is controlled by temperature.
    SoftAssignment next = asg;
    std::vector<double> gains(asg.k);
    for (std::size_t i = 0; i < asg.n; ++i) {
        const double* wxrow = wx.data() + i * asg.k;
        const double* xrow = asg.assignment.data() + i * asg.k;
        for (std::size_t c = 0; c < asg.k; ++c) {
            double value = wxrow[c] / (col_mass[c] + epsilon) * asg.aux[c] / temperature;
            if (!std::isfinite(value))
                throw Error(ErrorKind::NonFiniteIntermediate, "softmax gain is not finite");
            gains[c] = value;
        }
        // Max-subtraction keeps every factor in (0, 1]; the shift cancels in
        // the normalization.
        double peak = *std::max_element(gains.begin(), gains.end());
        double total = 0.0;
        double* out = next.assignment.data() + i * asg.k;
        for (std::size_t c = 0; c < asg.k; ++c) {
            out[c] = xrow[c] * std::exp(gains[c] - peak);
            total += out[c];
        }
        if (!(total > 0.0) || !std::isfinite(total))
            throw Error(ErrorKind::NonFiniteIntermediate, "assignment row lost all mass");
        for (std::size_t c = 0; c < asg.k; ++c) out[c] /= total;
    }
    return next;
}

AffinityGraph reweight_step(const AffinityGraph& graph, const SoftAssignment& asg, double beta) {
    std::vector<double> norms(asg.n, 0.0);
    for (std::size_t i = 0; i < asg.n; ++i) {
        const double* xrow = asg.assignment.data() + i * asg.k;
        double sq = 0.0;
        for (std::size_t c = 0; c < asg.k; ++c) sq += xrow[c] * xrow[c];
        if (!(sq > 0.0) || !std::isfinite(sq))
            throw Error(ErrorKind::ZeroRowNorm,
                        "assignment row " + std::to_string(i) + " has no magnitude");
        norms[i] = std::sqrt(sq);
    }

    AffinityGraph next = graph;
    for (std::size_t i = 0; i < asg.n; ++i) {
        const double* xi = asg.assignment.data() + i * asg.k;
        for (std::size_t j = i; j < asg.n; ++j) {
            const double* xj = asg.assignment.data() + j * asg.k;
            double dot = 0.0;
            for (std::size_t c = 0; c < asg.k; ++c) dot += xi[c] * xj[c];
            double cosine = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
            double gap = 1.0 - cosine;
            double factor = std::exp(-(gap * gap) / beta);
            double value = graph.weights[i * graph.n + j] * factor;
            next.weights[i * graph.n + j] = value;
            next.weights[j * graph.n + i] = value;
        }
    }
    recompute_degrees(next);
    return next;
}

// Sum of per-cluster Rayleigh quotients on the given graph; clusters without
// weighted volume contribute nothing.
double rayleigh_sum(const AffinityGraph& graph, const SoftAssignment& asg,
                    const std::vector<double>& wx) {
    std::vector<double> wquad, dquad;
    cluster_forms(graph, asg, wx, wquad, dquad);
    double total = 0.0;
    for (std::size_t c = 0; c < asg.k; ++c)
        if (dquad[c] > 0.0) total += wquad[c] / dquad[c];
    return total;
}

// True when the row-wise argmax labeling reaches every cluster. The soft
// objective plateaus at consensus states (all rows alike), so the stagnation
// stop must not fire while the hardened labeling is still degenerate.
bool all_clusters_used(const SoftAssignment& asg) {
    std::vector<char> seen(asg.k, 0);
    for (std::size_t i = 0; i < asg.n; ++i) {
        std::size_t best = 0;
        double top = asg.at(i, 0);
        for (std::size_t c = 1; c < asg.k; ++c) {
            if (asg.at(i, c) > top) {
                top = asg.at(i, c);
                best = c;
            }
        }
        seen[best] = 1;
    }
    for (char s : seen)
        if (!s) return false;
    return true;
}

// Uniform double in [0, 1) built from the top 53 bits of the generator so the
// stream does not depend on the standard library's distribution internals.
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

double fqt_objective(const AffinityGraph& graph, const SoftAssignment& asg) {
    check_shapes(graph, asg);
    std::vector<double> wx = weighted_sums(graph, asg);
    std::vector<double> wquad, dquad;
    cluster_forms(graph, asg, wx, wquad, dquad);
    double total = 0.0;
    for (std::size_t c = 0; c < asg.k; ++c) {
        double y = asg.aux[c];
        if (!(y >= 0.0) || !std::isfinite(y))
            throw Error(ErrorKind::InvariantViolation, "aux values must be finite and >= 0");
        double root = dquad[c] > 0.0 ? std::sqrt(wquad[c] / dquad[c]) : 0.0;
        total += 2.0 * y * root - y * y;
    }
    if (!std::isfinite(total))
        throw Error(ErrorKind::NonFiniteIntermediate, "objective is not finite");
    return total;
}

SoftAssignment update_aux(const AffinityGraph& graph, const SoftAssignment& asg, double epsilon) {
    check_shapes(graph, asg);
    std::vector<double> wx = weighted_sums(graph, asg);
    std::vector<double> wquad, dquad;
    cluster_forms(graph, asg, wx, wquad, dquad);
    SoftAssignment next = asg;
    for (std::size_t c = 0; c < asg.k; ++c) {
        if (dquad[c] <= epsilon)
            throw Error(ErrorKind::EmptyClusterVolume,
                        "cluster " + std::to_string(c) + " has no weighted volume");
        next.aux[c] = std::sqrt(wquad[c] / dquad[c]);
    }
    return next;
}

SoftAssignment update_assignment(const AffinityGraph& graph, const SoftAssignment& asg,
                                 double temperature, double epsilon) {
    check_shapes(graph, asg);
    if (!(temperature > 0.0))
        throw Error(ErrorKind::InvariantViolation, "temperature must be > 0");
    if (!(epsilon >= 0.0))
        throw Error(ErrorKind::InvariantViolation, "epsilon must be >= 0");
    std::vector<double> wx = weighted_sums(graph, asg);
    return assignment_step(graph, asg, wx, temperature, epsilon);
}

AffinityGraph reweight_graph(const AffinityGraph& graph, const SoftAssignment& asg, double beta) {
    check_shapes(graph, asg);
    if (!(beta > 0.0))
        throw Error(ErrorKind::InvariantViolation, "beta must be > 0");
    return reweight_step(graph, asg, beta);
}

SolveResult solve(const AffinityGraph& graph, const PipelineConfig& config) {
    validate_config(config);
    if (graph.n < 2)
        throw Error(ErrorKind::InvariantViolation, "graph needs at least 2 nodes");
    std::size_t k = static_cast<std::size_t>(config.k_clusters);

    SolveResult result;
    SoftAssignment& asg = result.assignment;
    asg.n = graph.n;
    asg.k = k;
    asg.assignment.resize(graph.n * k);
    asg.aux.assign(k, 1.0);

    // Rows start at the uniform distribution plus seeded noise of at most
    // one twentieth of the uniform mass, then renormalize.
    std::mt19937_64 rng(config.seed);
    double base = 1.0 / static_cast<double>(k);
    double spread = 0.05 * base;
    for (std::size_t i = 0; i < graph.n; ++i) {
        double* row = asg.assignment.data() + i * k;
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            row[c] = base + (next_unit(rng) * 2.0 - 1.0) * spread;
            sum += row[c];
        }
        for (std::size_t c = 0; c < k; ++c) row[c] /= sum;
    }

    AffinityGraph working = graph;
    double previous_score = 0.0;
    bool have_previous = false;

    for (int t = 0; t < config.t_cuts; ++t) {
        std::vector<double> wx = weighted_sums(working, asg);
        std::vector<double> wquad_pre, dquad_pre;
        asg.aux = aux_values(working, asg, wx, wquad_pre, dquad_pre);
        asg = assignment_step(working, asg, wx, config.softmax_temperature, config.epsilon);

        std::vector<double> wx_new = weighted_sums(working, asg);
        std::vector<double> wquad, dquad;
        cluster_forms(working, asg, wx_new, wquad, dquad);
        double surrogate = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double root = dquad[c] > 0.0 ? std::sqrt(wquad[c] / dquad[c]) : 0.0;
            surrogate += 2.0 * asg.aux[c] * root - asg.aux[c] * asg.aux[c];
        }
        result.report.objective_trace.push_back(surrogate);
        result.report.iterations_run = static_cast<std::size_t>(t) + 1;

        // Stagnation is measured on the input graph so the criterion stays
        // comparable when reweighting rescales the working copy.
        double score;
        if (config.beta_reweight > 0.0) {
            std::vector<double> wx_orig = weighted_sums(graph, asg);
            score = rayleigh_sum(graph, asg, wx_orig);
        } else {
            score = rayleigh_sum(graph, asg, wx_new);
        }
        if (have_previous) {
            double change = std::abs(score - previous_score);
            double floor_ = std::max(std::abs(previous_score), 1e-300);
            // A stagnant objective only counts as converged once the hardened
            // labeling uses every cluster. The relaxed score sits at its
            // global maximum K on consensus states (all rows alike), so
            // without the coverage gate the stop could freeze a degenerate
            // answer whose score happens to be flat.
            if (change / floor_ < config.objective_tol && all_clusters_used(asg)) {
                result.report.converged = true;
                break;
            }
        }
        previous_score = score;
        have_previous = true;

        if (config.beta_reweight > 0.0 && t + 1 < config.t_cuts)
            working = reweight_step(working, asg, config.beta_reweight);
    }
    return result;
}

} // namespace falcon
