// K-means clustering on decomposition cores with density-peak center
// initialization, plus the AC / NMI evaluation metrics.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "corrtensor/decomp2d.hpp"

namespace corrtensor {

struct KmeansResult {
  std::vector<int> labels;
  std::vector<Matrix> centers;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;  // summed squared distance per iteration
};

struct DensityPeaks {
  std::vector<double> rho;    // local density (neighbour count below d_cut)
  std::vector<double> delta;  // min distance to any denser point
  double d_cut = 0.0;
  std::vector<std::size_t> selected;  // chosen center indices, by rho*delta
};

struct ClusterReport {
  std::vector<int> labels;  // predicted cluster per sample
  std::vector<Matrix> centers;
  double ac = 0.0;
  double nmi = 0.0;
  std::vector<int> mapping;  // truth label matched to each predicted cluster, -1 if none
  std::size_t iterations = 0;
};

struct ClusterPipelineResult {
  ClusterReport report;
  DensityPeaks peaks;
  Matrix similarity;               // n x n kernel similarities, unit diagonal
  std::vector<std::size_t> order;  // row/col sample order of the similarity matrix
};

// Lloyd iterations on Frobenius distance. Stops when assignments stabilize or
// after 300 iterations; an empty cluster is re-seeded to the point farthest
// from its current center. Ties in the assignment go to the lowest cluster
// index, which makes the result deterministic.
KmeansResult kmeans(const std::vector<Matrix>& points, std::size_t k,
                    const std::vector<Matrix>& init_centers, std::uint64_t seed = 0);

// Density-peak seeding: d_cut is the neighbor_fraction quantile of the
// pairwise distances, rho counts neighbours closer than d_cut, delta is the
// distance to the nearest denser point (ties in rho broken by index; the
// densest point gets its largest distance to any other). Centers are the k
// points with the largest rho * delta.
std::pair<std::vector<Matrix>, DensityPeaks> density_peak_init(const std::vector<Matrix>& points,
                                                               std::size_t k,
                                                               double neighbor_fraction = 0.02);

// Clustering accuracy under the best cluster-to-class matching (Kuhn-Munkres
// on the confusion matrix). Returns the accuracy and, per predicted cluster,
// the matched truth label (-1 for unmatched clusters).
std::pair<double, std::vector<int>> clustering_accuracy(const std::vector<int>& truth,
                                                        const std::vector<int>& pred);

// Normalized mutual information in bits: I(S;T) / ((H(S) + H(T)) / 2), with
// the convention that two single-cluster labelings score 1.
double nmi(const std::vector<int>& truth, const std::vector<int>& pred);

// density_peak_init -> kmeans -> AC/NMI on the model's cores, plus the
// cluster-sorted kernel similarity matrix for inspection.
ClusterPipelineResult cluster_pipeline(const Decomp2DModel& decomp, const std::vector<int>& truth,
                                       std::size_t k, const CorrParams& params);

}  // namespace corrtensor
