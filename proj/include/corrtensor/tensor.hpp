// Dense N-way tensor with last-index-fastest linearization, mode-n products
// and unfoldings.
//
// Unfolding convention: mode n becomes the row index; the remaining modes are
// flattened into the column index in increasing mode order with the last one
// varying fastest. fold is the exact inverse for the same shape and mode.

#pragma once

#include <cstddef>
#include <vector>

#include "corrtensor/matrix.hpp"

namespace corrtensor {

class TensorN {
public:
  TensorN() = default;

  explicit TensorN(std::vector<std::size_t> shape);  // zero-filled
  TensorN(std::vector<std::size_t> shape, std::vector<double> data);

  static TensorN from_matrix(const Matrix& m);
  Matrix to_matrix() const;  // 2-mode tensors only

  std::size_t order() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const TensorN& other) const { return shape_ == other.shape_; }

private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Contract mode n with u: u.cols() must equal t.shape()[n]; the result
// replaces that extent by u.rows().
TensorN mode_n_product(const TensorN& t, const Matrix& u, std::size_t n);

Matrix unfold(const TensorN& t, std::size_t n);
TensorN fold(const Matrix& m, const std::vector<std::size_t>& shape, std::size_t n);

TensorN add(const TensorN& a, const TensorN& b);
TensorN sub(const TensorN& a, const TensorN& b);
TensorN scale(const TensorN& a, double c);
double frobenius_norm_sq(const TensorN& a);

}  // namespace corrtensor
