#include "falcon/sym_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "falcon/error.hpp"

namespace falcon {
namespace {

// Householder reduction of a symmetric matrix to tridiagonal form, with the
// accumulated orthogonal transform left in z.
void tridiagonalize(std::vector<double>& z, std::vector<double>& d, std::vector<double>& e,
                    std::size_t n) {
    auto at = [&](std::size_t r, std::size_t c) -> double& { return z[r * n + c]; };

    for (std::size_t i = n - 1; i >= 1; --i) {
        std::size_t l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (std::size_t k = 0; k <= l; ++k) scale += std::abs(at(i, k));
            if (scale == 0.0) {
                e[i] = at(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    at(i, k) /= scale;
                    h += at(i, k) * at(i, k);
                }
                double f = at(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                at(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    at(j, i) = at(i, j) / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
                    e[j] = g / h;
                    f += e[j] * at(i, j);
                }
                double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = at(i, j);
                    g = e[j] - hh * f;
                    e[j] = g;
                    for (std::size_t k = 0; k <= j; ++k)
                        at(j, k) -= f * e[k] + g * at(i, k);
                }
            }
        } else {
            e[i] = at(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::size_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k < i; ++k) g += at(i, k) * at(k, j);
                for (std::size_t k = 0; k < i; ++k) at(k, j) -= g * at(k, i);
            }
        }
        d[i] = at(i, i);
        at(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            at(j, i) = 0.0;
            at(i, j) = 0.0;
        }
    }
}

// Implicit-shift QL on the tridiagonal system, rotating the columns of z so
// they end up as eigenvectors.
void ql_implicit(std::vector<double>& z, std::vector<double>& d, std::vector<double>& e,
                 std::size_t n) {
    auto at = [&](std::size_t r, std::size_t c) -> double& { return z[r * n + c]; };

    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        int iterations = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iterations++ == 64)
                    throw Error(ErrorKind::NonFiniteIntermediate,
                                "eigenvalue iteration failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (std::size_t k = 0; k < n; ++k) {
                        f = at(k, i + 1);
                        at(k, i + 1) = s * at(k, i) + c * f;
                        at(k, i) = c * at(k, i) - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

SymEigen sym_eigen(std::span<const double> matrix, std::size_t n) {
    if (n == 0 || matrix.size() != n * n)
        throw Error(ErrorKind::ShapeMismatch, "matrix is not square of the stated order");
    for (double v : matrix)
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteInput, "matrix contains a non-finite value");

    SymEigen out;
    out.n = n;
    out.vectors.assign(matrix.begin(), matrix.end());
    out.values.assign(n, 0.0);

    if (n == 1) {
        out.values[0] = matrix[0];
        out.vectors[0] = 1.0;
        return out;
    }

    std::vector<double> e(n, 0.0);
    tridiagonalize(out.vectors, out.values, e, n);
    ql_implicit(out.vectors, out.values, e, n);

    // Ascending eigenvalues with a stable column permutation.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.values[a] < out.values[b]; });
    std::vector<double> values(n);
    std::vector<double> vectors(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        values[j] = out.values[order[j]];
        for (std::size_t i = 0; i < n; ++i) vectors[i * n + j] = out.vectors[i * n + order[j]];
    }
    out.values = std::move(values);
    out.vectors = std::move(vectors);
    return out;
}

} // namespace falcon
