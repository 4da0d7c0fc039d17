#include "corrtensor/corr_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "corrtensor/eig.hpp"
#include "corrtensor/errors.hpp"

namespace corrtensor {

namespace {

void check_inputs(const std::vector<TensorN>& samples, const std::vector<std::size_t>& ranks,
                  const FitConfig& config) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_corr_tensor: need at least 2 samples");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!samples[i].same_shape(samples[0])) {
      throw std::invalid_argument("fit_corr_tensor: sample " + std::to_string(i) +
                                  " shape differs from sample 0");
    }
  }
  const auto& shape = samples[0].shape();
  if (ranks.size() != shape.size()) {
    throw std::invalid_argument("fit_corr_tensor: rank vector length " +
                                std::to_string(ranks.size()) + " does not match order " +
                                std::to_string(shape.size()));
  }
  for (std::size_t n = 0; n < ranks.size(); ++n) {
    if (ranks[n] < 1 || ranks[n] > shape[n]) {
      throw std::invalid_argument("fit_corr_tensor: rank " + std::to_string(ranks[n]) +
                                  " out of range for mode " + std::to_string(n));
    }
  }
  if (config.max_iters < 1 || !(config.tol > 0.0)) {
    throw std::invalid_argument("fit_corr_tensor: max_iters must be >= 1 and tol > 0");
  }
}

TensorN arithmetic_mean(const std::vector<TensorN>& samples) {
  TensorN acc(samples[0].shape());
  for (const TensorN& x : samples)
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += x.data()[i];
  return scale(acc, 1.0 / static_cast<double>(samples.size()));
}

TensorN weighted_mean(const std::vector<TensorN>& samples, const std::vector<double>& w) {
  TensorN acc(samples[0].shape());
  double total = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += w[s] * samples[s].data()[i];
    total += w[s];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("fit_corr_tensor: sample weights sum to zero");
  }
  return scale(acc, 1.0 / total);
}

std::vector<TensorN> centered(const std::vector<TensorN>& samples, const TensorN& mean) {
  std::vector<TensorN> out;
  out.reserve(samples.size());
  for (const TensorN& x : samples) out.push_back(sub(x, mean));
  return out;
}

// Core: contract every mode with the transposed factor, in mode order.
TensorN core_of(const TensorN& xhat, const std::vector<Matrix>& factors) {
  TensorN core = xhat;
  for (std::size_t n = 0; n < factors.size(); ++n) {
    core = mode_n_product(core, transpose(factors[n]), n);
  }
  return core;
}

std::vector<double> residual_energies(const std::vector<TensorN>& xhat,
                                      const std::vector<Matrix>& factors) {
  std::vector<double> e(xhat.size());
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const TensorN core = core_of(xhat[i], factors);
    e[i] = std::max(frobenius_norm_sq(xhat[i]) - frobenius_norm_sq(core), 0.0);
  }
  return e;
}

// Mode-n covariance: sum_i w_i W W^T with W the mode-n unfolding of sample i
// contracted with every other transposed factor.
Matrix mode_covariance(const std::vector<TensorN>& xhat, const std::vector<Matrix>& factors,
                       std::size_t n, const std::vector<double>& w) {
  const std::size_t extent = xhat[0].shape()[n];
  Matrix acc(extent, extent);
  for (std::size_t s = 0; s < xhat.size(); ++s) {
    TensorN h = xhat[s];
    for (std::size_t m = 0; m < factors.size(); ++m) {
      if (m == n) continue;
      h = mode_n_product(h, transpose(factors[m]), m);
    }
    const Matrix unfolded = unfold(h, n);
    const Matrix term = matmul(unfolded, transpose(unfolded));
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += w[s] * term.data()[i];
  }
  return acc;
}

std::vector<Matrix> init_factors(const std::vector<TensorN>& xhat,
                                 const std::vector<std::size_t>& ranks) {
  const std::size_t order = xhat[0].order();
  std::vector<Matrix> factors(order);
  for (std::size_t n = 0; n < order; ++n) {
    const std::size_t extent = xhat[0].shape()[n];
    Matrix acc(extent, extent);
    for (const TensorN& x : xhat) {
      const Matrix unfolded = unfold(x, n);
      const Matrix term = matmul(unfolded, transpose(unfolded));
      for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += term.data()[i];
    }
    factors[n] = top_k_eigvecs(acc, ranks[n]);
  }
  return factors;
}

double sum_residuals(const std::vector<double>& e) {
  double acc = 0.0;
  for (double v : e) acc += v;
  return acc;
}

bool relative_change_below(double current, double previous, double tol) {
  return std::abs(current - previous) / std::max(previous, 1e-15) < tol;
}

}  // namespace

TensorModel fit_corr_tensor(const std::vector<TensorN>& samples,
                            const std::vector<std::size_t>& ranks, const FitConfig& config,
                            const CorrParams& params) {
  check_inputs(samples, ranks, config);
  const std::size_t order = samples[0].order();

  const bool second_order = params.p == 2.0;
  const auto weight_of = [&](double energy) {
    return second_order ? sample_weight(energy, params) : sample_weight_p(energy, params);
  };
  const auto loss_of = [&](const std::vector<double>& energies) {
    std::vector<double> norms(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) norms[i] = std::sqrt(energies[i]);
    return second_order ? corr_loss(norms, params) : corr_ploss(norms, params);
  };

  // Unweighted least-squares phase from the plain mode covariances.
  TensorN mean = arithmetic_mean(samples);
  std::vector<TensorN> xhat = centered(samples, mean);
  std::vector<Matrix> factors = init_factors(xhat, ranks);
  const std::vector<double> ones(samples.size(), 1.0);

  double previous = sum_residuals(residual_energies(xhat, factors));
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    for (std::size_t n = 0; n < order; ++n) {
      factors[n] = top_k_eigvecs(mode_covariance(xhat, factors, n, ones), ranks[n]);
    }
    const double objective = sum_residuals(residual_energies(xhat, factors));
    if (relative_change_below(objective, previous, config.tol)) break;
    previous = objective;
  }

  // Correntropy phase.
  std::vector<double> e = residual_energies(xhat, factors);
  std::vector<double> trace;
  previous = loss_of(e);
  trace.push_back(previous);

  std::vector<Matrix> best_factors = factors;
  TensorN best_mean = mean;
  double best_objective = previous;

  std::vector<double> w(samples.size());
  bool converged = false;
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    for (std::size_t i = 0; i < e.size(); ++i) w[i] = weight_of(e[i]);
    mean = weighted_mean(samples, w);
    xhat = centered(samples, mean);
    for (std::size_t n = 0; n < order; ++n) {
      factors[n] = top_k_eigvecs(mode_covariance(xhat, factors, n, w), ranks[n]);
    }
    e = residual_energies(xhat, factors);
    const double objective = loss_of(e);
    trace.push_back(objective);
    if (objective < best_objective) {
      best_objective = objective;
      best_factors = factors;
      best_mean = mean;
    }
    if (relative_change_below(objective, previous, config.tol)) {
      converged = true;
      break;
    }
    previous = objective;
  }
  if (!converged) {
    factors = best_factors;
    mean = best_mean;
  }

  TensorModel model;
  model.factors = std::move(factors);
  model.mean = std::move(mean);
  model.trace = std::move(trace);
  model.params = params;
  model.converged = converged;

  const std::vector<TensorN> final_xhat = centered(samples, model.mean);
  model.weights.residuals = residual_energies(final_xhat, model.factors);
  model.weights.weights.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    model.weights.weights[i] = weight_of(model.weights.residuals[i]);
  }
  model.cores.reserve(samples.size());
  for (const TensorN& x : final_xhat) model.cores.push_back(core_of(x, model.factors));
  return model;
}

TensorN project_tensor(const TensorModel& model, const TensorN& x) {
  if (!x.same_shape(model.mean)) {
    throw std::invalid_argument("project_tensor: sample shape does not match the fitted shape");
  }
  return core_of(sub(x, model.mean), model.factors);
}

TensorN reconstruct_tensor(const TensorModel& model, const TensorN& core) {
  for (std::size_t n = 0; n < model.factors.size(); ++n) {
    if (core.shape()[n] != model.factors[n].cols()) {
      throw std::invalid_argument("reconstruct_tensor: core shape does not match the ranks");
    }
  }
  TensorN out = core;
  for (std::size_t n = 0; n < model.factors.size(); ++n) {
    out = mode_n_product(out, model.factors[n], n);
  }
  return add(out, model.mean);
}

}  // namespace corrtensor
