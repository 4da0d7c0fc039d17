#include "corrtensor/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "corrtensor/hungarian.hpp"

namespace corrtensor {

namespace {

double dist_sq(const Matrix& a, const Matrix& b) { return frobenius_norm_sq(sub(a, b)); }

// Compact labels to 0..K-1 in sorted label order; returns the sorted values.
std::vector<int> compact_labels(const std::vector<int>& labels, std::vector<int>& compacted) {
  std::set<int> unique(labels.begin(), labels.end());
  std::vector<int> values(unique.begin(), unique.end());
  std::map<int, int> index;
  for (std::size_t i = 0; i < values.size(); ++i) index[values[i]] = static_cast<int>(i);
  compacted.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) compacted[i] = index[labels[i]];
  return values;
}

void check_label_pair(const std::vector<int>& truth, const std::vector<int>& pred,
                      const char* op) {
  if (truth.size() != pred.size()) {
    throw std::invalid_argument(std::string(op) + ": label lists differ in length");
  }
  if (truth.empty()) throw std::invalid_argument(std::string(op) + ": empty label lists");
}

}  // namespace

KmeansResult kmeans(const std::vector<Matrix>& points, std::size_t k,
                    const std::vector<Matrix>& init_centers, std::uint64_t /*seed*/) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  if (k < 1 || k > points.size()) {
    throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " out of range for " +
                                std::to_string(points.size()) + " points");
  }
  if (init_centers.size() != k) {
    throw std::invalid_argument("kmeans: expected " + std::to_string(k) + " initial centers");
  }

  const std::size_t n = points.size();
  KmeansResult result;
  result.centers = init_centers;
  result.labels.assign(n, -1);

  constexpr std::size_t kMaxIters = 300;
  for (std::size_t iter = 0; iter < kMaxIters; ++iter) {
    // Assignment, ties to the lowest cluster index.
    std::vector<int> labels(n);
    std::vector<std::size_t> counts(k, 0);
    std::vector<double> point_cost(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = dist_sq(points[i], result.centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = dist_sq(points[i], result.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[i] = static_cast<int>(best);
      point_cost[i] = best_d;
      ++counts[best];
    }

    // Re-seed empty clusters to the point farthest from its center.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t farthest = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] <= 1) continue;  // keep singleton clusters alive
        if (point_cost[i] > far_d) {
          far_d = point_cost[i];
          farthest = i;
        }
      }
      --counts[labels[farthest]];
      labels[farthest] = static_cast<int>(c);
      counts[c] = 1;
      result.centers[c] = points[farthest];
      point_cost[farthest] = 0.0;
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) objective += point_cost[i];
    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;

    if (labels == result.labels) break;
    result.labels = labels;

    // Update step: centroid of each cluster.
    for (std::size_t c = 0; c < k; ++c) {
      Matrix acc(points[0].rows(), points[0].cols());
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (result.labels[i] != static_cast<int>(c)) continue;
        for (std::size_t j = 0; j < acc.size(); ++j) acc.data()[j] += points[i].data()[j];
        ++count;
      }
      if (count > 0) result.centers[c] = scale(acc, 1.0 / static_cast<double>(count));
    }
  }
  return result;
}

std::pair<std::vector<Matrix>, DensityPeaks> density_peak_init(const std::vector<Matrix>& points,
                                                               std::size_t k,
                                                               double neighbor_fraction) {
  const std::size_t n = points.size();
  if (k < 1 || k > n) {
    throw std::invalid_argument("density_peak_init: k out of range");
  }
  if (!(neighbor_fraction > 0.0) || !(neighbor_fraction < 1.0)) {
    throw std::invalid_argument("density_peak_init: neighbor_fraction must be in (0, 1)");
  }

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  std::vector<double> all_pairs;
  all_pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(dist_sq(points[i], points[j]));
      dist[i][j] = d;
      dist[j][i] = d;
      all_pairs.push_back(d);
    }
  }
  if (all_pairs.empty() || *std::max_element(all_pairs.begin(), all_pairs.end()) == 0.0) {
    throw std::invalid_argument("density_peak_init: all points are identical");
  }

  std::sort(all_pairs.begin(), all_pairs.end());
  const std::size_t pos = std::min(
      all_pairs.size() - 1,
      static_cast<std::size_t>(std::llround(neighbor_fraction * static_cast<double>(all_pairs.size()))));

  DensityPeaks peaks;
  peaks.d_cut = all_pairs[pos];
  peaks.rho.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dist[i][j] < peaks.d_cut) peaks.rho[i] += 1.0;
    }
  }

  // Rank by density, ties by index: delta is the distance to the nearest
  // point earlier in this order; the first point gets its farthest distance.
  std::vector<std::size_t> by_density(n);
  std::iota(by_density.begin(), by_density.end(), std::size_t{0});
  std::stable_sort(by_density.begin(), by_density.end(),
                   [&](std::size_t a, std::size_t b) { return peaks.rho[a] > peaks.rho[b]; });

  peaks.delta.assign(n, 0.0);
  const std::size_t top = by_density[0];
  peaks.delta[top] = *std::max_element(dist[top].begin(), dist[top].end());
  for (std::size_t r = 1; r < n; ++r) {
    const std::size_t i = by_density[r];
    double best = dist[i][by_density[0]];
    for (std::size_t s = 1; s < r; ++s) best = std::min(best, dist[i][by_density[s]]);
    peaks.delta[i] = best;
  }

  std::vector<std::size_t> by_gamma(n);
  std::iota(by_gamma.begin(), by_gamma.end(), std::size_t{0});
  std::stable_sort(by_gamma.begin(), by_gamma.end(), [&](std::size_t a, std::size_t b) {
    return peaks.rho[a] * peaks.delta[a] > peaks.rho[b] * peaks.delta[b];
  });
  peaks.selected.assign(by_gamma.begin(), by_gamma.begin() + static_cast<std::ptrdiff_t>(k));

  std::vector<Matrix> centers;
  centers.reserve(k);
  for (std::size_t idx : peaks.selected) centers.push_back(points[idx]);
  return {std::move(centers), std::move(peaks)};
}

std::pair<double, std::vector<int>> clustering_accuracy(const std::vector<int>& truth,
                                                        const std::vector<int>& pred) {
  check_label_pair(truth, pred, "clustering_accuracy");

  std::vector<int> t_compact, p_compact;
  const std::vector<int> t_values = compact_labels(truth, t_compact);
  const std::vector<int> p_values = compact_labels(pred, p_compact);

  std::vector<std::vector<double>> counts(p_values.size(),
                                          std::vector<double>(t_values.size(), 0.0));
  for (std::size_t i = 0; i < truth.size(); ++i) counts[p_compact[i]][t_compact[i]] += 1.0;

  const std::vector<int> assignment = assign_max_benefit(counts);
  double matched = 0.0;
  std::vector<int> mapping(p_values.size(), -1);
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (assignment[p] >= 0) {
      matched += counts[p][static_cast<std::size_t>(assignment[p])];
      mapping[p] = t_values[static_cast<std::size_t>(assignment[p])];
    }
  }
  return {matched / static_cast<double>(truth.size()), mapping};
}

double nmi(const std::vector<int>& truth, const std::vector<int>& pred) {
  check_label_pair(truth, pred, "nmi");
  const double n = static_cast<double>(truth.size());

  std::vector<int> s_compact, t_compact;
  const std::size_t ns = compact_labels(truth, s_compact).size();
  const std::size_t nt = compact_labels(pred, t_compact).size();

  // Integer counts keep the identical-partition and independent cases exact:
  // the log arguments reduce to the same rationals on both sides.
  std::vector<double> cs(ns, 0.0), ct(nt, 0.0);
  std::vector<std::vector<double>> joint(ns, std::vector<double>(nt, 0.0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    cs[s_compact[i]] += 1.0;
    ct[t_compact[i]] += 1.0;
    joint[s_compact[i]][t_compact[i]] += 1.0;
  }

  double mutual = 0.0;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      if (joint[i][j] > 0.0) {
        mutual += (joint[i][j] / n) * std::log2((n * joint[i][j]) / (cs[i] * ct[j]));
      }

  double hs = 0.0, ht = 0.0;
  for (double c : cs)
    if (c > 0.0) hs += (c / n) * std::log2(n / c);
  for (double c : ct)
    if (c > 0.0) ht += (c / n) * std::log2(n / c);

  const double denom = 0.5 * (hs + ht);
  if (denom == 0.0) return 1.0;  // both sides a single cluster
  return mutual / denom;
}

ClusterPipelineResult cluster_pipeline(const Decomp2DModel& decomp, const std::vector<int>& truth,
                                       std::size_t k, const CorrParams& params) {
  if (truth.size() != decomp.cores.size()) {
    throw std::invalid_argument("cluster_pipeline: label count does not match fitted cores");
  }

  ClusterPipelineResult out;
  auto [centers, peaks] = density_peak_init(decomp.cores, k);
  out.peaks = std::move(peaks);

  const KmeansResult km = kmeans(decomp.cores, k, centers);
  out.report.labels = km.labels;
  out.report.centers = km.centers;
  out.report.iterations = km.iterations;
  std::tie(out.report.ac, out.report.mapping) = clustering_accuracy(truth, km.labels);
  out.report.nmi = nmi(truth, km.labels);

  // Similarity matrix reordered by cluster label (stable in sample index),
  // normalized so the diagonal is exactly 1.
  const std::size_t n = decomp.cores.size();
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return km.labels[a] < km.labels[b]; });
  out.similarity = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d =
          std::sqrt(dist_sq(decomp.cores[out.order[i]], decomp.cores[out.order[j]]));
      out.similarity(i, j) = ggd_kernel(d, params) / params.gamma;
    }
  }
  return out;
}

}  // namespace corrtensor
