#include "corrtensor/decomp2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "corrtensor/eig.hpp"
#include "corrtensor/errors.hpp"

namespace corrtensor {

namespace {

void check_samples(const std::vector<Matrix>& samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit: need at least 2 samples, got " +
                                std::to_string(samples.size()));
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!samples[i].same_shape(samples[0])) {
      throw std::invalid_argument("fit: sample " + std::to_string(i) +
                                  " shape differs from sample 0");
    }
  }
}

void check_config(const FitConfig& config, std::size_t rows, std::size_t cols) {
  if (config.k1 < 1 || config.k1 > rows || config.k2 < 1 || config.k2 > cols) {
    throw std::invalid_argument("fit: ranks k1=" + std::to_string(config.k1) +
                                ", k2=" + std::to_string(config.k2) + " out of range for " +
                                std::to_string(rows) + "x" + std::to_string(cols) + " samples");
  }
  if (config.max_iters < 1 || !(config.tol > 0.0)) {
    throw std::invalid_argument("fit: max_iters must be >= 1 and tol > 0");
  }
}

Matrix arithmetic_mean(const std::vector<Matrix>& samples) {
  Matrix acc(samples[0].rows(), samples[0].cols());
  for (const Matrix& x : samples)
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += x.data()[i];
  return scale(acc, 1.0 / static_cast<double>(samples.size()));
}

Matrix weighted_mean(const std::vector<Matrix>& samples, const std::vector<double>& w) {
  Matrix acc(samples[0].rows(), samples[0].cols());
  double total = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += w[s] * samples[s].data()[i];
    total += w[s];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("fit: sample weights sum to zero (all residuals saturated the "
                         "kernel); decrease alpha or increase beta");
  }
  return scale(acc, 1.0 / total);
}

std::vector<Matrix> centered(const std::vector<Matrix>& samples, const Matrix& mean) {
  std::vector<Matrix> out;
  out.reserve(samples.size());
  for (const Matrix& x : samples) out.push_back(sub(x, mean));
  return out;
}

// e_i = ||X_hat||_F^2 - ||L^T X_hat R||_F^2  (= Tr(X^T X - X^T L L^T X R R^T)).
std::vector<double> residual_energies(const std::vector<Matrix>& xhat, const Matrix& left,
                                      const Matrix& right) {
  const Matrix lt = transpose(left);
  std::vector<double> e(xhat.size());
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const Matrix core = matmul(matmul(lt, xhat[i]), right);
    e[i] = std::max(frobenius_norm_sq(xhat[i]) - frobenius_norm_sq(core), 0.0);
  }
  return e;
}

// Row-row covariance: sum_i w_i (X_hat_i R)(X_hat_i R)^T.
Matrix row_covariance(const std::vector<Matrix>& xhat, const Matrix& right,
                      const std::vector<double>& w) {
  Matrix acc(xhat[0].rows(), xhat[0].rows());
  for (std::size_t s = 0; s < xhat.size(); ++s) {
    const Matrix b = matmul(xhat[s], right);
    const Matrix term = matmul(b, transpose(b));
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += w[s] * term.data()[i];
  }
  return acc;
}

// Column-column covariance: sum_i w_i (L^T X_hat_i)^T (L^T X_hat_i).
Matrix col_covariance(const std::vector<Matrix>& xhat, const Matrix& left,
                      const std::vector<double>& w) {
  const Matrix lt = transpose(left);
  Matrix acc(xhat[0].cols(), xhat[0].cols());
  for (std::size_t s = 0; s < xhat.size(); ++s) {
    const Matrix a = matmul(lt, xhat[s]);
    const Matrix term = matmul(transpose(a), a);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += w[s] * term.data()[i];
  }
  return acc;
}

// Unprojected initial bases: leading eigvectors of sum X X^T and sum X^T X.
void init_bases(const std::vector<Matrix>& xhat, const FitConfig& config, Matrix& left,
                Matrix& right) {
  Matrix crow(xhat[0].rows(), xhat[0].rows());
  Matrix ccol(xhat[0].cols(), xhat[0].cols());
  for (const Matrix& x : xhat) {
    const Matrix r = matmul(x, transpose(x));
    for (std::size_t i = 0; i < crow.size(); ++i) crow.data()[i] += r.data()[i];
    const Matrix c = matmul(transpose(x), x);
    for (std::size_t i = 0; i < ccol.size(); ++i) ccol.data()[i] += c.data()[i];
  }
  left = top_k_eigvecs(crow, config.k1);
  right = top_k_eigvecs(ccol, config.k2);
}

double sum_residuals(const std::vector<double>& e) {
  double acc = 0.0;
  for (double v : e) acc += v;
  return acc;
}

double sum_sqrt_residuals(const std::vector<double>& e) {
  double acc = 0.0;
  for (double v : e) acc += std::sqrt(v);
  return acc;
}

bool relative_change_below(double current, double previous, double tol) {
  return std::abs(current - previous) / std::max(previous, 1e-15) < tol;
}

// Final packaging shared by all fitters: cores and residuals at the returned
// state, plus the caller-provided weight rule.
template <typename WeightFn>
Decomp2DModel package(const std::vector<Matrix>& samples, Matrix left, Matrix right, Matrix mean,
                      std::vector<double> trace, bool converged, WeightFn&& weight_of) {
  Decomp2DModel model;
  model.left = std::move(left);
  model.right = std::move(right);
  model.mean = std::move(mean);
  model.trace = std::move(trace);
  model.converged = converged;

  const std::vector<Matrix> xhat = centered(samples, model.mean);
  model.weights.residuals = residual_energies(xhat, model.left, model.right);
  model.weights.weights.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    model.weights.weights[i] = weight_of(model.weights.residuals[i]);
  }

  const Matrix lt = transpose(model.left);
  model.cores.reserve(samples.size());
  for (const Matrix& x : xhat) model.cores.push_back(matmul(matmul(lt, x), model.right));
  return model;
}

}  // namespace

Decomp2DModel fit_2dpca(const std::vector<Matrix>& samples, std::size_t k) {
  check_samples(samples);
  if (k < 1 || k > samples[0].cols()) {
    throw std::invalid_argument("fit_2dpca: k=" + std::to_string(k) + " out of range for " +
                                std::to_string(samples[0].cols()) + " columns");
  }
  const Matrix mean = arithmetic_mean(samples);
  const std::vector<Matrix> xhat = centered(samples, mean);

  Matrix ccol(samples[0].cols(), samples[0].cols());
  for (const Matrix& x : xhat) {
    const Matrix c = matmul(transpose(x), x);
    for (std::size_t i = 0; i < ccol.size(); ++i) ccol.data()[i] += c.data()[i];
  }
  Matrix right = top_k_eigvecs(ccol, k);
  Matrix left = Matrix::identity(samples[0].rows());

  const double objective = sum_residuals(residual_energies(xhat, left, right));
  return package(samples, std::move(left), std::move(right), mean, {objective}, true,
                 [](double) { return 1.0; });
}

Decomp2DModel fit_2dsvd(const std::vector<Matrix>& samples, const FitConfig& config) {
  check_samples(samples);
  check_config(config, samples[0].rows(), samples[0].cols());

  const Matrix mean = arithmetic_mean(samples);
  const std::vector<Matrix> xhat = centered(samples, mean);
  const std::vector<double> ones(samples.size(), 1.0);

  Matrix left, right;
  init_bases(xhat, config, left, right);

  std::vector<double> trace;
  double previous = sum_residuals(residual_energies(xhat, left, right));
  trace.push_back(previous);

  bool converged = false;
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    left = top_k_eigvecs(row_covariance(xhat, right, ones), config.k1);
    right = top_k_eigvecs(col_covariance(xhat, left, ones), config.k2);
    const double objective = sum_residuals(residual_energies(xhat, left, right));
    trace.push_back(objective);
    if (relative_change_below(objective, previous, config.tol)) {
      converged = true;
      break;
    }
    previous = objective;
  }
  return package(samples, std::move(left), std::move(right), mean, std::move(trace), converged,
                 [](double) { return 1.0; });
}

Decomp2DModel fit_r1_2dsvd(const std::vector<Matrix>& samples, const FitConfig& config) {
  check_samples(samples);
  check_config(config, samples[0].rows(), samples[0].cols());

  const Matrix mean = arithmetic_mean(samples);
  const std::vector<Matrix> xhat = centered(samples, mean);

  Matrix left, right;
  init_bases(xhat, config, left, right);

  std::vector<double> e = residual_energies(xhat, left, right);
  std::vector<double> trace;
  double previous = sum_sqrt_residuals(e);
  trace.push_back(previous);

  const auto r1_weight = [](double energy) {
    return 1.0 / std::sqrt(std::max(energy, kResidualFloor));
  };

  std::vector<double> w(samples.size());
  bool converged = false;
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    for (std::size_t i = 0; i < e.size(); ++i) w[i] = r1_weight(e[i]);
    left = top_k_eigvecs(row_covariance(xhat, right, w), config.k1);
    right = top_k_eigvecs(col_covariance(xhat, left, w), config.k2);
    e = residual_energies(xhat, left, right);
    const double objective = sum_sqrt_residuals(e);
    trace.push_back(objective);
    if (relative_change_below(objective, previous, config.tol)) {
      converged = true;
      break;
    }
    previous = objective;
  }
  return package(samples, std::move(left), std::move(right), mean, std::move(trace), converged,
                 r1_weight);
}

Decomp2DModel fit_corr_2dsvd(const std::vector<Matrix>& samples, const FitConfig& config,
                             const CorrParams& params) {
  check_samples(samples);
  check_config(config, samples[0].rows(), samples[0].cols());

  const bool second_order = params.p == 2.0;
  const auto weight_of = [&](double energy) {
    return second_order ? sample_weight(energy, params) : sample_weight_p(energy, params);
  };
  const auto loss_of = [&](const std::vector<double>& energies) {
    std::vector<double> norms(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) norms[i] = std::sqrt(energies[i]);
    return second_order ? corr_loss(norms, params) : corr_ploss(norms, params);
  };

  const Decomp2DModel init = fit_2dsvd(samples, config);
  Matrix left = init.left;
  Matrix right = init.right;
  Matrix mean = init.mean;

  std::vector<Matrix> xhat = centered(samples, mean);
  std::vector<double> e = residual_energies(xhat, left, right);

  std::vector<double> trace;
  double previous = loss_of(e);
  trace.push_back(previous);

  Matrix best_left = left, best_right = right, best_mean = mean;
  double best_objective = previous;

  std::vector<double> w(samples.size());
  bool converged = false;
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    for (std::size_t i = 0; i < e.size(); ++i) w[i] = weight_of(e[i]);
    mean = weighted_mean(samples, w);
    xhat = centered(samples, mean);
    left = top_k_eigvecs(row_covariance(xhat, right, w), config.k1);
    right = top_k_eigvecs(col_covariance(xhat, left, w), config.k2);
    e = residual_energies(xhat, left, right);
    const double objective = loss_of(e);
    trace.push_back(objective);
    if (objective < best_objective) {
      best_objective = objective;
      best_left = left;
      best_right = right;
      best_mean = mean;
    }
    if (relative_change_below(objective, previous, config.tol)) {
      converged = true;
      break;
    }
    previous = objective;
  }
  if (!converged) {
    left = best_left;
    right = best_right;
    mean = best_mean;
  }

  Decomp2DModel model = package(samples, std::move(left), std::move(right), std::move(mean),
                                std::move(trace), converged, weight_of);
  model.params = params;
  return model;
}

Matrix project(const Decomp2DModel& model, const Matrix& x) {
  if (!x.same_shape(model.mean)) {
    throw std::invalid_argument("project: sample shape does not match the fitted shape");
  }
  return matmul(matmul(transpose(model.left), sub(x, model.mean)), model.right);
}

Matrix reconstruct(const Decomp2DModel& model, const Matrix& core) {
  if (core.rows() != model.left.cols() || core.cols() != model.right.cols()) {
    throw std::invalid_argument("reconstruct: core shape does not match the fitted ranks");
  }
  return add(matmul(matmul(model.left, core), transpose(model.right)), model.mean);
}

double reconstruction_error(const Decomp2DModel& model, const std::vector<Matrix>& samples,
                            const std::vector<bool>& exclude) {
  if (!exclude.empty() && exclude.size() != samples.size()) {
    throw std::invalid_argument("reconstruction_error: exclude mask length mismatch");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!exclude.empty() && exclude[i]) continue;
    const Matrix rec = reconstruct(model, project(model, samples[i]));
    acc += frobenius_norm_sq(sub(samples[i], rec));
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("reconstruction_error: every sample is excluded");
  }
  return acc / static_cast<double>(count);
}

}  // namespace corrtensor
