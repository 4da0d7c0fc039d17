// Generalized Gaussian kernel, the correntropy losses built on it, and the
// per-sample reweighting functions used by the robust fitters.
//
// Residual convention: solvers hand sample_weight / sample_weight_p the
// SQUARED Frobenius residual energy e = ||X_hat - L M R^T||_F^2, which the
// weight formulas raise to alpha/2. The scalar losses take raw kernel
// arguments (for a matrix residual that is the unsquared Frobenius norm, so
// |e|^alpha reduces to the same energy^(alpha/2)).

#pragma once

#include <span>

namespace corrtensor {

// Energies below this floor are clamped before the power alpha/2 - 1 is
// applied; for alpha < 2 the raw weight diverges as e -> 0.
inline constexpr double kResidualFloor = 1e-12;

struct CorrParams {
  double alpha;   // error power, > 0
  double beta;    // kernel width, > 0
  double lambda;  // beta^(-alpha)
  double gamma;   // alpha / (2 beta Gamma(1/alpha)), kernel peak value
  double p;       // loss power, > 0, 2 recovers the second-order loss

  static CorrParams make(double alpha, double beta, double p = 2.0);
};

// Gamma function for z > 0 (Lanczos approximation, g = 7, 9 coefficients).
double gamma_function(double z);

// G(e) = gamma * exp(-lambda |e|^alpha). Even in e, maximum gamma at e = 0.
double ggd_kernel(double e, const CorrParams& params);

// gamma - mean_i G(e_i), in [0, gamma). Zero iff all residuals are zero.
double corr_loss(std::span<const double> residuals, const CorrParams& params);

// mean_i (gamma - G(e_i))^(p/2); identical to corr_loss when p = 2.
double corr_ploss(std::span<const double> residuals, const CorrParams& params);

// w = exp(-lambda e^(alpha/2)) * e^(alpha/2 - 1) with e clamped at the floor.
// e is a squared residual energy, e >= 0.
double sample_weight(double e, const CorrParams& params);

// p-order variant: (p/2) (gamma - G_e)^(p/2 - 1) * gamma *
// exp(-lambda e^(alpha/2)) * e^(alpha/2 - 1) with G_e = gamma exp(-lambda
// e^(alpha/2)). Equals gamma * sample_weight(e) at p = 2.
double sample_weight_p(double e, const CorrParams& params);

}  // namespace corrtensor
