// Correntropy-robust N-way decomposition: one orthonormal factor per content
// mode, a per-sample core tensor, and the same reweighting scheme as the 2D
// solver. On 2-mode samples this reproduces fit_corr_2dsvd.

#pragma once

#include <optional>
#include <vector>

#include "corrtensor/decomp2d.hpp"
#include "corrtensor/tensor.hpp"

namespace corrtensor {

struct TensorModel {
  std::vector<Matrix> factors;  // factors[n]: shape[n] x ranks[n], orthonormal columns
  std::vector<TensorN> cores;   // one per sample, shape = ranks
  TensorN mean;
  SampleWeights weights;        // evaluated at the returned factors/mean
  std::vector<double> trace;    // correntropy objective per iteration
  std::optional<CorrParams> params;
  bool converged = true;
};

// Alternating solver: factors initialized from the unweighted mode-n
// covariances and refined by plain least-squares passes until config.tol,
// then correntropy iterations (weights -> robust mean -> per-mode eigvector
// updates) tracking the correntropy loss. Non-convergence returns the
// best-objective iterate with converged = false.
TensorModel fit_corr_tensor(const std::vector<TensorN>& samples,
                            const std::vector<std::size_t>& ranks, const FitConfig& config,
                            const CorrParams& params);

// Core of a sample: (x - mean) contracted with every factor transposed.
TensorN project_tensor(const TensorModel& model, const TensorN& x);

// mean + core contracted with every factor.
TensorN reconstruct_tensor(const TensorModel& model, const TensorN& core);

}  // namespace corrtensor
