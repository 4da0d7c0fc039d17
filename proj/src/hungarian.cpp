#include "corrtensor/hungarian.hpp"

#include <limits>
#include <stdexcept>

namespace corrtensor {

// Classic potentials formulation with a dummy 0th row/column, minimizing the
// negated benefit on a square matrix padded with zeros.
std::vector<int> assign_max_benefit(const std::vector<std::vector<double>>& benefit) {
  const std::size_t n_rows = benefit.size();
  if (n_rows == 0) throw std::invalid_argument("assign_max_benefit: empty matrix");
  const std::size_t n_cols = benefit[0].size();
  for (const auto& row : benefit) {
    if (row.size() != n_cols) {
      throw std::invalid_argument("assign_max_benefit: ragged benefit matrix");
    }
  }

  const std::size_t dim = std::max(n_rows, n_cols);
  const auto cost = [&](std::size_t i, std::size_t j) -> double {
    if (i < n_rows && j < n_cols) return -benefit[i][j];
    return 0.0;  // padding
  };

  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
  std::vector<std::size_t> match(dim + 1, 0);  // match[j] = row assigned to column j
  std::vector<std::size_t> way(dim + 1, 0);

  for (std::size_t i = 1; i <= dim; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(dim + 1, kInf);
    std::vector<bool> used(dim + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= dim; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= dim; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(n_rows, -1);
  for (std::size_t j = 1; j <= dim; ++j) {
    const std::size_t i = match[j];
    if (i >= 1 && i <= n_rows && j <= n_cols) {
      assignment[i - 1] = static_cast<int>(j - 1);
    }
  }
  return assignment;
}

}  // namespace corrtensor
