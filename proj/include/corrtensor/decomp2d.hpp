// Two-sided decomposition fitters: 2DPCA, 2DSVD, R1-2DSVD, and the
// correntropy-reweighted Corr-2DSVD, plus projection and reconstruction.
//
// All fitters are single-threaded and accumulate reductions in sample order,
// so identical inputs give bitwise identical models. Fitted models are
// immutable values and safe to share across threads.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "corrtensor/correntropy.hpp"
#include "corrtensor/matrix.hpp"

namespace corrtensor {

struct SampleWeights {
  std::vector<double> weights;    // one per training sample, finite, >= 0
  std::vector<double> residuals;  // squared Frobenius residual energies
};

struct FitConfig {
  std::size_t k1 = 1;
  std::size_t k2 = 1;
  std::size_t max_iters = 100;
  double tol = 1e-5;  // relative objective change between iterations
  std::uint64_t seed = 0;
};

struct Decomp2DModel {
  Matrix left;   // a x k1, orthonormal columns
  Matrix right;  // b x k2, orthonormal columns
  Matrix mean;   // a x b
  std::vector<Matrix> cores;       // k1 x k2, M_i = L^T (X_i - mean) R
  SampleWeights weights;           // evaluated at the returned left/right/mean
  std::vector<double> trace;       // objective per iteration, entry 0 = init
  std::optional<CorrParams> params;
  bool converged = true;
};

// One-sided baseline: right basis from the column-column covariance of the
// centered samples, left = identity.
Decomp2DModel fit_2dpca(const std::vector<Matrix>& samples, std::size_t k);

// Alternating two-sided least squares. Objective is the summed squared
// residual; stops when its relative change drops below config.tol.
Decomp2DModel fit_2dsvd(const std::vector<Matrix>& samples, const FitConfig& config);

// Iteratively reweighted variant with w_i = 1 / sqrt(e_i) (clamped), mean
// kept arithmetic. Objective is the sum of unsquared residual norms.
Decomp2DModel fit_r1_2dsvd(const std::vector<Matrix>& samples, const FitConfig& config);

// Correntropy-robust fitter. Starts from the fit_2dsvd solution, then per
// iteration: sample weights from the previous iterate's residuals, weighted
// mean update, weighted covariance eigvector updates for left then right.
// Tracks the correntropy loss (p-order loss when params.p != 2); on
// non-convergence the best-objective iterate is returned with converged set
// to false.
Decomp2DModel fit_corr_2dsvd(const std::vector<Matrix>& samples, const FitConfig& config,
                             const CorrParams& params);

// Core of a sample: L^T (x - mean) R.
Matrix project(const Decomp2DModel& model, const Matrix& x);

// L core R^T + mean.
Matrix reconstruct(const Decomp2DModel& model, const Matrix& core);

// Mean squared reconstruction error over the non-excluded samples. exclude
// may be empty (nothing excluded) or one flag per sample.
double reconstruction_error(const Decomp2DModel& model, const std::vector<Matrix>& samples,
                            const std::vector<bool>& exclude = {});

}  // namespace corrtensor
