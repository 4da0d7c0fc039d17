#include "corrtensor/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace corrtensor {

ClassifierModel fit_classifier(const Decomp2DModel& decomp, const std::vector<int>& labels,
                               const CorrParams& params, bool use_correntropy_weights) {
  if (labels.size() != decomp.cores.size()) {
    throw std::invalid_argument("fit_classifier: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(decomp.cores.size()) + " cores");
  }
  if (labels.empty()) throw std::invalid_argument("fit_classifier: empty training set");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  ClassifierModel model;
  model.params = params;
  model.decomp = decomp;
  for (const auto& [class_id, members] : by_class) {
    Matrix acc(decomp.cores[0].rows(), decomp.cores[0].cols());
    double total = 0.0;
    for (std::size_t i : members) {
      const double w = use_correntropy_weights
                           ? sample_weight(decomp.weights.residuals[i], params)
                           : 1.0;
      for (std::size_t j = 0; j < acc.size(); ++j) acc.data()[j] += w * decomp.cores[i].data()[j];
      total += w;
    }
    if (!(total > 0.0)) {
      // Every weight underflowed; fall back to the plain class mean.
      acc = Matrix(decomp.cores[0].rows(), decomp.cores[0].cols());
      for (std::size_t i : members)
        for (std::size_t j = 0; j < acc.size(); ++j) acc.data()[j] += decomp.cores[i].data()[j];
      total = static_cast<double>(members.size());
    }
    model.class_ids.push_back(class_id);
    model.class_centers.push_back(scale(acc, 1.0 / total));
  }
  return model;
}

std::vector<double> class_similarities(const ClassifierModel& model, const Matrix& x) {
  const Matrix core = project(model.decomp, x);
  std::vector<double> sims(model.class_centers.size());
  for (std::size_t c = 0; c < model.class_centers.size(); ++c) {
    const double dist = std::sqrt(frobenius_norm_sq(sub(core, model.class_centers[c])));
    sims[c] = ggd_kernel(dist, model.params);
  }
  return sims;
}

int classify(const ClassifierModel& model, const Matrix& x) {
  if (model.class_centers.empty()) throw std::invalid_argument("classify: unfitted model");
  const Matrix core = project(model.decomp, x);
  std::size_t best = 0;
  double best_dist = frobenius_norm_sq(sub(core, model.class_centers[0]));
  for (std::size_t c = 1; c < model.class_centers.size(); ++c) {
    const double dist = frobenius_norm_sq(sub(core, model.class_centers[c]));
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return model.class_ids[best];
}

}  // namespace corrtensor
