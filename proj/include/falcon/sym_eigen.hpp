#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace falcon {

// Full eigensystem of a dense symmetric matrix. values are ascending and
// vectors stores the matching orthonormal eigenvectors column-major, so
// vector j lives at vectors[i * n + j] for i in [0, n).
struct SymEigen {
    std::size_t n = 0;
    std::vector<double> values;
    std::vector<double> vectors;

    double vec(std::size_t i, std::size_t j) const { return vectors[i * n + j]; }
};

// Householder tridiagonalization followed by implicit-shift QL. Deterministic:
// identical input bytes give identical output bytes.
SymEigen sym_eigen(std::span<const double> matrix, std::size_t n);

} // namespace falcon
