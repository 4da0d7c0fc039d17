#include "corrtensor/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace corrtensor {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) {
    if (s == 0) throw std::invalid_argument("TensorN: zero extent");
    n *= s;
  }
  return n;
}

void check_mode(const TensorN& t, std::size_t n, const char* op) {
  if (n >= t.order()) {
    throw std::invalid_argument(std::string(op) + ": mode " + std::to_string(n) +
                                " out of range for order " + std::to_string(t.order()));
  }
}

}  // namespace

TensorN::TensorN(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

TensorN::TensorN(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_)) {
    throw std::invalid_argument("TensorN: data length does not match shape");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("TensorN: non-finite entry");
  }
}

TensorN TensorN::from_matrix(const Matrix& m) {
  return TensorN({m.rows(), m.cols()}, m.data());
}

Matrix TensorN::to_matrix() const {
  if (order() != 2) {
    throw std::invalid_argument("TensorN::to_matrix: tensor order is " + std::to_string(order()));
  }
  return Matrix(shape_[0], shape_[1], data_);
}

Matrix unfold(const TensorN& t, std::size_t n) {
  check_mode(t, n, "unfold");
  const auto& shape = t.shape();
  std::size_t prefix = 1, suffix = 1;
  for (std::size_t k = 0; k < n; ++k) prefix *= shape[k];
  for (std::size_t k = n + 1; k < shape.size(); ++k) suffix *= shape[k];
  const std::size_t extent = shape[n];

  Matrix out(extent, prefix * suffix);
  for (std::size_t p = 0; p < prefix; ++p)
    for (std::size_t i = 0; i < extent; ++i)
      for (std::size_t q = 0; q < suffix; ++q)
        out(i, p * suffix + q) = t.data()[(p * extent + i) * suffix + q];
  return out;
}

TensorN fold(const Matrix& m, const std::vector<std::size_t>& shape, std::size_t n) {
  if (n >= shape.size()) {
    throw std::invalid_argument("fold: mode out of range");
  }
  std::size_t prefix = 1, suffix = 1;
  for (std::size_t k = 0; k < n; ++k) prefix *= shape[k];
  for (std::size_t k = n + 1; k < shape.size(); ++k) suffix *= shape[k];
  const std::size_t extent = shape[n];
  if (m.rows() != extent || m.cols() != prefix * suffix) {
    throw std::invalid_argument("fold: matrix shape does not match target shape");
  }

  TensorN out(shape);
  for (std::size_t p = 0; p < prefix; ++p)
    for (std::size_t i = 0; i < extent; ++i)
      for (std::size_t q = 0; q < suffix; ++q)
        out.data()[(p * extent + i) * suffix + q] = m(i, p * suffix + q);
  return out;
}

TensorN mode_n_product(const TensorN& t, const Matrix& u, std::size_t n) {
  check_mode(t, n, "mode_n_product");
  if (u.cols() != t.shape()[n]) {
    throw std::invalid_argument("mode_n_product: u has " + std::to_string(u.cols()) +
                                " columns, mode extent is " + std::to_string(t.shape()[n]));
  }
  std::vector<std::size_t> out_shape = t.shape();
  out_shape[n] = u.rows();
  return fold(matmul(u, unfold(t, n)), out_shape, n);
}

TensorN add(const TensorN& a, const TensorN& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("tensor add: shape mismatch");
  TensorN out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

TensorN sub(const TensorN& a, const TensorN& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("tensor sub: shape mismatch");
  TensorN out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

TensorN scale(const TensorN& a, double c) {
  TensorN out = a;
  for (double& v : out.data()) v *= c;
  return out;
}

double frobenius_norm_sq(const TensorN& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return acc;
}

}  // namespace corrtensor
