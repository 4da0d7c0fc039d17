#include "corrtensor/correntropy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace corrtensor {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos coefficients, g = 7.
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

void check_params(const CorrParams& params) {
  if (!(params.alpha > 0.0) || !(params.beta > 0.0) || !(params.p > 0.0)) {
    throw std::invalid_argument("CorrParams: alpha, beta, p must be positive");
  }
}

}  // namespace

double gamma_function(double z) {
  if (!(z > 0.0)) {
    throw std::invalid_argument("gamma_function: z must be positive, got " + std::to_string(z));
  }
  if (z < 0.5) {
    // Reflection keeps the series argument in the accurate range.
    return kPi / (std::sin(kPi * z) * gamma_function(1.0 - z));
  }
  const double x = z - 1.0;
  double acc = kLanczos[0];
  for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (x + static_cast<double>(i));
  const double t = x + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * acc;
}

CorrParams CorrParams::make(double alpha, double beta, double p) {
  CorrParams params;
  params.alpha = alpha;
  params.beta = beta;
  params.p = p;
  params.lambda = 0.0;
  params.gamma = 0.0;
  check_params(params);
  params.lambda = std::pow(beta, -alpha);
  params.gamma = alpha / (2.0 * beta * gamma_function(1.0 / alpha));
  if (!std::isfinite(params.lambda) || !std::isfinite(params.gamma) || params.gamma <= 0.0) {
    throw std::invalid_argument("CorrParams: derived lambda/gamma not finite");
  }
  return params;
}

double ggd_kernel(double e, const CorrParams& params) {
  return params.gamma * std::exp(-params.lambda * std::pow(std::abs(e), params.alpha));
}

double corr_loss(std::span<const double> residuals, const CorrParams& params) {
  if (residuals.empty()) throw std::invalid_argument("corr_loss: empty residual list");
  double acc = 0.0;
  for (double e : residuals) acc += params.gamma - ggd_kernel(e, params);
  return acc / static_cast<double>(residuals.size());
}

double corr_ploss(std::span<const double> residuals, const CorrParams& params) {
  if (residuals.empty()) throw std::invalid_argument("corr_ploss: empty residual list");
  const double half_p = 0.5 * params.p;
  double acc = 0.0;
  for (double e : residuals) {
    const double gap = params.gamma - ggd_kernel(e, params);
    acc += (half_p == 1.0) ? gap : std::pow(gap, half_p);
  }
  return acc / static_cast<double>(residuals.size());
}

double sample_weight(double e, const CorrParams& params) {
  if (e < 0.0) {
    throw std::invalid_argument("sample_weight: negative residual energy " + std::to_string(e));
  }
  const double ec = std::max(e, kResidualFloor);
  const double half_alpha = 0.5 * params.alpha;
  return std::exp(-params.lambda * std::pow(ec, half_alpha)) * std::pow(ec, half_alpha - 1.0);
}

double sample_weight_p(double e, const CorrParams& params) {
  if (e < 0.0) {
    throw std::invalid_argument("sample_weight_p: negative residual energy " + std::to_string(e));
  }
  const double ec = std::max(e, kResidualFloor);
  const double half_alpha = 0.5 * params.alpha;
  const double expo = std::exp(-params.lambda * std::pow(ec, half_alpha));
  const double gap = params.gamma - params.gamma * expo;
  const double half_p = 0.5 * params.p;
  const double gap_pow = (half_p == 1.0) ? 1.0 : std::pow(gap, half_p - 1.0);
  return half_p * gap_pow * params.gamma * expo * std::pow(ec, half_alpha - 1.0);
}

}  // namespace corrtensor
