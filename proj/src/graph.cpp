#include "falcon/graph.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace falcon {

void recompute_degrees(AffinityGraph& graph) {
    graph.degrees.assign(graph.n, 0.0);
    for (std::size_t i = 0; i < graph.n; ++i) {
        double sum = 0.0;
        const double* row = graph.weights.data() + i * graph.n;
        for (std::size_t j = 0; j < graph.n; ++j) sum += row[j];
        graph.degrees[i] = sum;
    }
}

AffinityGraph graph_from_weights(std::size_t n, std::vector<double> weights) {
    if (weights.size() != n * n)
        throw Error(ErrorKind::ShapeMismatch, "weight matrix is not " + std::to_string(n) + "^2");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double w = weights[i * n + j];
            if (!std::isfinite(w) || w < 0.0)
                throw Error(ErrorKind::NonFiniteInput, "weights must be finite and >= 0");
            if (w != weights[j * n + i])
                throw Error(ErrorKind::InvariantViolation, "weight matrix is not symmetric");
        }
    }
    AffinityGraph graph;
    graph.n = n;
    graph.weights = std::move(weights);
    recompute_degrees(graph);
    return graph;
}

AffinityGraph build_affinity(const Tensor& features, double alpha_power, double lambda_affinity) {
    if (features.rank() != 2)
        throw Error(ErrorKind::ShapeMismatch, "features must be a 2-d tensor");
    std::size_t n = features.dim(0);
    std::size_t d = features.dim(1);
    if (n < 2 || d < 1)
        throw Error(ErrorKind::InvariantViolation, "need at least 2 rows and 1 feature column");
    if (!(alpha_power > 0.0))
        throw Error(ErrorKind::InvariantViolation, "alpha_power must be > 0");
    if (!(lambda_affinity >= 0.0))
        throw Error(ErrorKind::InvariantViolation, "lambda_affinity must be >= 0");
    for (float v : features.data)
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteInput, "features contain a non-finite value");

    AffinityGraph graph;
    graph.n = n;
    graph.weights.assign(n * n, 0.0);

    // Pairwise inner products; each value is written to both mirror slots so
    // the matrix is symmetric bit for bit.
    for (std::size_t i = 0; i < n; ++i) {
        const float* fi = features.data.data() + i * d;
        for (std::size_t j = i; j < n; ++j) {
            const float* fj = features.data.data() + j * d;
            double dot = 0.0;
            for (std::size_t c = 0; c < d; ++c) dot += double(fi[c]) * double(fj[c]);
            graph.weights[i * n + j] = dot;
            graph.weights[j * n + i] = dot;
        }
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double w : graph.weights) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    if (!(hi > lo))
        throw Error(ErrorKind::DegenerateAffinity, "all pairwise similarities are equal");

    double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double scaled = std::pow((graph.weights[i * n + j] - lo) / range, alpha_power);
            graph.weights[i * n + j] = scaled;
            graph.weights[j * n + i] = scaled;
        }
    }

    // The diagonal boost uses the row sums of the rescaled-and-powered matrix;
    // cached degrees are then recomputed from the final weights.
    if (lambda_affinity > 0.0) {
        std::vector<double> pre(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            const double* row = graph.weights.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) sum += row[j];
            pre[i] = sum;
        }
        for (std::size_t i = 0; i < n; ++i) graph.weights[i * n + i] += lambda_affinity * pre[i];
    }
    recompute_degrees(graph);
    return graph;
}

double laplacian_quadratic(const AffinityGraph& graph, std::span<const double> x) {
    if (x.size() != graph.n)
        throw Error(ErrorKind::ShapeMismatch, "vector length does not match node count");
    double norm_sq = 0.0;
    for (double v : x) {
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteInput, "vector contains a non-finite value");
        norm_sq += v * v;
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < graph.n; ++i) {
        quad += graph.degrees[i] * x[i] * x[i];
        const double* row = graph.weights.data() + i * graph.n;
        double wx = 0.0;
        for (std::size_t j = 0; j < graph.n; ++j) wx += row[j] * x[j];
        quad -= x[i] * wx;
    }
    if (quad < 0.0) {
        if (quad >= -1e-9 * norm_sq) return 0.0;
        throw Error(ErrorKind::NonFiniteIntermediate,
                    "quadratic form is negative beyond roundoff tolerance");
    }
    return quad;
}

} // namespace falcon
