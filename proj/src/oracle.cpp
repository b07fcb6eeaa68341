#include "falcon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "falcon/sym_eigen.hpp"

namespace falcon {
namespace {

void check_labels(const AffinityGraph& graph, std::span<const int> labels, int k) {
    if (k < 1)
        throw Error(ErrorKind::InvariantViolation, "cluster count must be >= 1");
    if (labels.size() != graph.n)
        throw Error(ErrorKind::ShapeMismatch, "label count does not match node count");
    for (int label : labels)
        if (label < 0 || label >= k)
            throw Error(ErrorKind::InvariantViolation,
                        "label " + std::to_string(label) + " outside [0, k)");
}

// Volume and within-cluster association per cluster in one O(n^2) pass.
void cluster_masses(const AffinityGraph& graph, std::span<const int> labels, int k,
                    std::vector<double>& volume, std::vector<double>& assoc) {
    volume.assign(static_cast<std::size_t>(k), 0.0);
    assoc.assign(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < graph.n; ++i) {
        int label = labels[i];
        volume[label] += graph.degrees[i];
        const double* row = graph.weights.data() + i * graph.n;
        double within = 0.0;
        for (std::size_t j = 0; j < graph.n; ++j)
            if (labels[j] == label) within += row[j];
        assoc[label] += within;
    }
}

} // namespace

double partition_ncut(const AffinityGraph& graph, std::span<const int> labels, int k) {
    check_labels(graph, labels, k);
    std::vector<double> volume, assoc;
    cluster_masses(graph, labels, k, volume, assoc);
    double total = 0.0;
    for (int c = 0; c < k; ++c)
        if (volume[c] > 0.0) total += (volume[c] - assoc[c]) / volume[c];
    return total;
}

double partition_rayleigh(const AffinityGraph& graph, std::span<const int> labels, int k) {
    check_labels(graph, labels, k);
    std::vector<double> volume, assoc;
    cluster_masses(graph, labels, k, volume, assoc);
    double total = 0.0;
    for (int c = 0; c < k; ++c)
        if (volume[c] > 0.0) total += assoc[c] / volume[c];
    return total;
}

std::pair<Partition, double> exact_kway_ncut(const AffinityGraph& graph, int k, int max_nodes) {
    if (k < 2)
        throw Error(ErrorKind::InvariantViolation, "cluster count must be >= 2");
    if (graph.n > static_cast<std::size_t>(max_nodes))
        throw Error(ErrorKind::TooLarge, "exhaustive search is capped at " +
                                             std::to_string(max_nodes) + " nodes");
    if (static_cast<std::size_t>(k) > graph.n)
        throw Error(ErrorKind::InsufficientNodes, "cannot form " + std::to_string(k) +
                                                      " nonempty clusters from " +
                                                      std::to_string(graph.n) + " nodes");

    std::size_t n = graph.n;
    std::vector<int> labels(n, 0);
    Partition best;
    double best_value = std::numeric_limits<double>::infinity();

    // Depth-first walk over restricted growth strings: node 0 is pinned to
    // cluster 0 and node i may open at most one new cluster. Enumeration
    // order is lexicographic, so strict improvement keeps the smallest tie.
    auto walk = [&](auto&& self, std::size_t node, int used) -> void {
        if (node == n) {
            if (used != k) return;
            std::vector<double> volume, assoc;
            cluster_masses(graph, labels, k, volume, assoc);
            double value = 0.0;
            for (int c = 0; c < k; ++c) {
                if (!(volume[c] > 0.0)) return; // not a valid k-way cut
                value += (volume[c] - assoc[c]) / volume[c];
            }
            if (value < best_value) {
                best_value = value;
                best.labels = labels;
                best.k = k;
            }
            return;
        }
        // Even if every remaining node opens a new cluster we must reach k.
        if (used + static_cast<int>(n - node) < k) return;
        int limit = std::min(used, k - 1);
        for (int c = 0; c <= limit; ++c) {
            labels[node] = c;
            self(self, node + 1, std::max(used, c + 1));
        }
    };
    labels[0] = 0;
    walk(walk, 1, 1);

    if (!std::isfinite(best_value))
        throw Error(ErrorKind::InsufficientNodes,
                    "no labeling with " + std::to_string(k) + " positive-volume clusters");
    return {best, best_value};
}

namespace {

// Connected components of an induced subgraph, in order of smallest member.
std::vector<std::vector<std::size_t>> components_of(const AffinityGraph& graph,
                                                    const std::vector<std::size_t>& nodes) {
    std::vector<std::vector<std::size_t>> comps;
    std::vector<char> seen(nodes.size(), 0);
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        if (seen[s]) continue;
        std::vector<std::size_t> comp;
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            comp.push_back(u);
            for (std::size_t v = 0; v < nodes.size(); ++v) {
                if (!seen[v] && graph.weight(nodes[u], nodes[v]) > 0.0) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

} // namespace

Partition spectral_recursive_ncut(const AffinityGraph& graph, int k) {
    if (k < 2)
        throw Error(ErrorKind::InvariantViolation, "cluster count must be >= 2");
    if (static_cast<std::size_t>(k) > graph.n)
        throw Error(ErrorKind::InsufficientNodes, "cannot form " + std::to_string(k) +
                                                      " nonempty clusters from " +
                                                      std::to_string(graph.n) + " nodes");

    std::vector<std::vector<std::size_t>> parts;
    {
        std::vector<std::size_t> all(graph.n);
        for (std::size_t i = 0; i < graph.n; ++i) all[i] = i;
        parts.push_back(std::move(all));
    }

    while (parts.size() < static_cast<std::size_t>(k)) {
        // Split the splittable part with the largest volume in the input graph.
        std::size_t pick = parts.size();
        double pick_volume = -1.0;
        for (std::size_t p = 0; p < parts.size(); ++p) {
            if (parts[p].size() < 2) continue;
            double volume = 0.0;
            for (std::size_t node : parts[p]) volume += graph.degrees[node];
            if (volume > pick_volume) {
                pick_volume = volume;
                pick = p;
            }
        }
        std::vector<std::size_t> nodes = std::move(parts[pick]);
        parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(pick));
        std::size_t m = nodes.size();

        std::vector<std::size_t> left, right;
        auto comps = components_of(graph, nodes);
        if (comps.size() > 1) {
            // Disconnected: peel off the component holding the smallest node.
            for (std::size_t u : comps[0]) left.push_back(nodes[u]);
            for (std::size_t c = 1; c < comps.size(); ++c)
                for (std::size_t u : comps[c]) right.push_back(nodes[u]);
        } else {
            std::vector<double> sub_deg(m, 0.0);
            for (std::size_t a = 0; a < m; ++a) {
                double sum = 0.0;
                for (std::size_t b = 0; b < m; ++b) sum += graph.weight(nodes[a], nodes[b]);
                sub_deg[a] = sum;
            }
            std::vector<double> lsym(m * m, 0.0);
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b < m; ++b) {
                    double value = -graph.weight(nodes[a], nodes[b]) /
                                   std::sqrt(sub_deg[a] * sub_deg[b]);
                    if (a == b) value += 1.0;
                    lsym[a * m + b] = value;
                }
            }
            SymEigen eigen = sym_eigen(lsym, m);
            for (std::size_t a = 0; a < m; ++a) {
                if (eigen.vec(a, 1) < 0.0) left.push_back(nodes[a]);
                else right.push_back(nodes[a]);
            }
            if (left.empty() || right.empty()) {
                // Degenerate second eigenvector: peel the most negative entry.
                left.clear();
                right.clear();
                std::size_t lone = 0;
                for (std::size_t a = 1; a < m; ++a)
                    if (eigen.vec(a, 1) < eigen.vec(lone, 1)) lone = a;
                left.push_back(nodes[lone]);
                for (std::size_t a = 0; a < m; ++a)
                    if (a != lone) right.push_back(nodes[a]);
            }
        }
        std::sort(left.begin(), left.end());
        std::sort(right.begin(), right.end());
        parts.push_back(std::move(left));
        parts.push_back(std::move(right));
    }

    // Canonical labels: clusters numbered by their smallest member.
    std::sort(parts.begin(), parts.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    Partition out;
    out.k = k;
    out.labels.assign(graph.n, 0);
    for (std::size_t p = 0; p < parts.size(); ++p)
        for (std::size_t node : parts[p]) out.labels[node] = static_cast<int>(p);
    return out;
}

} // namespace falcon
