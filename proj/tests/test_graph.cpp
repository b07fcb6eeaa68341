#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "falcon/graph.hpp"

using namespace falcon;

namespace {

double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Tensor random_features(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    Tensor t;
    t.shape = {n, d};
    t.data.resize(n * d);
    for (float& v : t.data) v = static_cast<float>(next_unit(rng));
    return t;
}

} // namespace

TEST_CASE("affinity entries match a scalar recomputation") {
    // 3 rows, 2 channels, hand-traceable: Gram -> min-max rescale -> power.
    Tensor feats;
    feats.shape = {3, 2};
    feats.data = {1.0f, 0.0f, 0.0f, 1.0f, 1.0f, 1.0f};
    double alpha = 2.0;
    AffinityGraph g = build_affinity(feats, alpha, 0.0);

    // Gram matrix: [[1,0,1],[0,1,1],[1,1,2]]; min 0, max 2.
    std::vector<double> gram = {1, 0, 1, 0, 1, 1, 1, 1, 2};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double expected = std::pow(gram[i * 3 + j] / 2.0, alpha);
            CHECK(g.weights[i * 3 + j] == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("affinity matrix is exactly symmetric") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 2 + rng() % 12;
        std::size_t d = 1 + rng() % 6;
        AffinityGraph g = build_affinity(random_features(rng, n, d), 4.5, 0.3);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(g.weights[i * n + j] == g.weights[j * n + i]);
    }
}

TEST_CASE("power transform keeps 0 and 1 fixed and amplifies contrast") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 2 + rng() % 10;
        AffinityGraph g = build_affinity(random_features(rng, n, 3), 1.0 + 8.0 * next_unit(rng), 0.0);
        double lo = 1e300, hi = -1e300;
        for (double w : g.weights) {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
        // the min-max rescale pins the extremes, and pow leaves them in place
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }
    // contrast amplification on rescaled entries a < b: (a/b)^α < a/b for α > 1
    for (int rep = 0; rep < 100; ++rep) {
        double a = 0.05 + 0.4 * next_unit(rng);
        double b = a + 0.05 + (0.95 - a - 0.05) * next_unit(rng);
        double alpha = 1.5 + 6.0 * next_unit(rng);
        CHECK(std::pow(a, alpha) / std::pow(b, alpha) < a / b);
    }
}

TEST_CASE("degrees equal row sums") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 2 + rng() % 12;
        AffinityGraph g = build_affinity(random_features(rng, n, 4), 3.0, next_unit(rng));
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) sum += g.weights[i * n + j];
            CHECK(g.degrees[i] == doctest::Approx(sum).epsilon(1e-9));
        }
    }
}

TEST_CASE("diagonal regularization adds the pre-regularization row sums") {
    std::mt19937_64 rng(8);
    Tensor feats = random_features(rng, 6, 3);
    AffinityGraph base = build_affinity(feats, 2.5, 0.0);
    double lambda = 0.4;
    AffinityGraph boosted = build_affinity(feats, 2.5, lambda);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            double expected = base.weights[i * 6 + j];
            if (i == j) expected += lambda * base.degrees[i];
            CHECK(boosted.weights[i * 6 + j] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("laplacian quadratic matches the pairwise difference form") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t n = 2 + rng() % 15;
        AffinityGraph g = build_affinity(random_features(rng, n, 3), 2.0, 0.0);
        std::vector<double> x(n);
        for (double& v : x) v = next_unit(rng) * 4.0 - 2.0;
        double pairwise = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                pairwise += 0.5 * g.weights[i * n + j] * (x[i] - x[j]) * (x[i] - x[j]);
        CHECK(laplacian_quadratic(g, x) == doctest::Approx(pairwise).epsilon(1e-9));
    }
}

TEST_CASE("degenerate and invalid inputs are rejected") {
    Tensor constant;
    constant.shape = {3, 2};
    constant.data = {1.f, 1.f, 1.f, 1.f, 1.f, 1.f};
    try {
        build_affinity(constant, 2.0, 0.0);
        FAIL("expected a degenerate-affinity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateAffinity);
    }

    Tensor bad;
    bad.shape = {2, 1};
    bad.data = {1.f, std::numeric_limits<float>::quiet_NaN()};
    CHECK_THROWS_AS(build_affinity(bad, 2.0, 0.0), Error);

    CHECK_THROWS_AS(graph_from_weights(2, {1.0, 0.5, 0.4, 1.0}), Error); // asymmetric
    CHECK_THROWS_AS(graph_from_weights(2, {1.0, -0.5, -0.5, 1.0}), Error); // negative
}
