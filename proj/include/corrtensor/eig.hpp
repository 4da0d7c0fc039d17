// Deterministic symmetric eigensolver (cyclic Jacobi).
//
// Eigenvalues come back sorted descending; ties keep the pre-sort column
// order. Each eigenvector is flipped so that its first component of largest
// magnitude is non-negative, which makes the output reproducible bit for bit
// for identical inputs.

#pragma once

#include <vector>

#include "corrtensor/matrix.hpp"

namespace corrtensor {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i], unit norm
};

// Full decomposition of a symmetric matrix. Throws std::invalid_argument for
// non-square or asymmetric input (max deviation above 1e-9 * max entry) and
// std::runtime_error if 100 sweeps do not reach the off-diagonal threshold
// 1e-12 * ||a||_F.
EigenDecomposition sym_eig(const Matrix& a);

// Columns are the k leading eigenvectors of a. 1 <= k <= a.rows().
Matrix top_k_eigvecs(const Matrix& a, std::size_t k);

}  // namespace corrtensor
