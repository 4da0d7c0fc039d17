// Dense row-major matrix and the handful of kernels the decompositions need.
// All storage is row-major with explicit dimensions; there is no broadcasting,
// so every shape mismatch surfaces as an exception at the call site.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace corrtensor {

class Matrix {
public:
  Matrix() = default;

  // Zero-filled rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols);

  // Takes ownership of row-major data. Rejects size mismatches and any
  // non-finite entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
double trace(const Matrix& a);

// Sum of squared entries, Tr(a^T a).
double frobenius_norm_sq(const Matrix& a);

// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& a);

}  // namespace corrtensor
