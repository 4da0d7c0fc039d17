#include "corrtensor/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include "corrtensor/errors.hpp"

namespace corrtensor {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

void check_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("sym_eig: matrix is not square (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      dev = std::max(dev, std::abs(a(i, j) - a(j, i)));
  if (dev > 1e-9 * max_abs(a)) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric (max deviation " +
                                std::to_string(dev) + ")");
  }
}

// One Jacobi rotation annihilating a(p,q), accumulated into v.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const std::size_t n = a.rows();
  const double apq = a(p, q);
  const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;  // avoids theta^2 overflow
  } else {
    t = ((theta >= 0.0) ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == p || i == q) continue;
    const double aip = a(i, p);
    const double aiq = a(i, q);
    a(i, p) = aip - s * (aiq + tau * aip);
    a(i, q) = aiq + s * (aip - tau * aiq);
    a(p, i) = a(i, p);
    a(q, i) = a(i, q);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double vip = v(i, p);
    const double viq = v(i, q);
    v(i, p) = vip - s * (viq + tau * vip);
    v(i, q) = viq + s * (vip - tau * viq);
  }
}

void apply_sign_convention(Matrix& vectors) {
  for (std::size_t j = 0; j < vectors.cols(); ++j) {
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
      const double v = std::abs(vectors(i, j));
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    if (vectors(arg, j) < 0.0) {
      for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, j) = -vectors(i, j);
    }
  }
}

}  // namespace

EigenDecomposition sym_eig(const Matrix& a) {
  check_symmetric(a);
  const std::size_t n = a.rows();

  Matrix work = a;
  // Symmetrize exactly so the sweeps operate on a bitwise symmetric copy.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (work(i, j) + work(j, i));
      work(i, j) = m;
      work(j, i) = m;
    }

  Matrix v = Matrix::identity(n);
  const double threshold = 1e-12 * std::sqrt(frobenius_norm_sq(a));
  constexpr int kMaxSweeps = 100;

  bool converged = off_diagonal_norm(work) <= threshold;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (work(p, q) != 0.0) rotate(work, v, p, q);
    converged = off_diagonal_norm(work) <= threshold;
  }
  if (!converged) {
    throw NumericalError("sym_eig: no convergence within 100 sweeps");
  }

  // Sort descending; stable so exact ties keep their pre-sort column order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return work(i, i) > work(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = work(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  apply_sign_convention(out.vectors);
  return out;
}

Matrix top_k_eigvecs(const Matrix& a, std::size_t k) {
  if (k < 1 || k > a.rows()) {
    throw std::invalid_argument("top_k_eigvecs: k=" + std::to_string(k) +
                                " out of range for n=" + std::to_string(a.rows()));
  }
  const EigenDecomposition d = sym_eig(a);
  Matrix out(a.rows(), k);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) out(i, j) = d.vectors(i, j);
  return out;
}

}  // namespace corrtensor
