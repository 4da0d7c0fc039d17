// Center-based nearest neighbour classifier on decomposition cores: one
// weighted core center per class, correntropy kernel similarity at test time.

#pragma once

#include <vector>

#include "corrtensor/decomp2d.hpp"

namespace corrtensor {

struct ClassifierModel {
  std::vector<Matrix> class_centers;  // one k1 x k2 center per class
  std::vector<int> class_ids;         // sorted ascending, aligned with centers
  CorrParams params;
  Decomp2DModel decomp;
};

// Per-class weighted center of the training cores. Weights come from the
// correntropy weight of each sample's fitted residual; pass
// use_correntropy_weights = false to force uniform weights (how baseline
// decompositions are evaluated). A class whose weights all underflow to zero
// falls back to its unweighted center.
ClassifierModel fit_classifier(const Decomp2DModel& decomp, const std::vector<int>& labels,
                               const CorrParams& params, bool use_correntropy_weights = true);

// Kernel similarity to every class center, aligned with class_ids:
// gamma * exp(-lambda * ||M_test - center||_F^alpha).
std::vector<double> class_similarities(const ClassifierModel& model, const Matrix& x);

// Class id with the maximum similarity; ties go to the lowest class id. The
// similarity is strictly decreasing in the center distance, so the argmax is
// evaluated on distances and never underflows.
int classify(const ClassifierModel& model, const Matrix& x);

}  // namespace corrtensor
