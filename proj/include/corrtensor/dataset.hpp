// Dataset ingestion and the outlier-injection protocols.
//
// Images load as matrices (grayscale) or rows x cols x 3 tensors (color) with
// pixels scaled to [0,1]. Every stochastic operation takes an explicit seed
// and derives its own named stream, so results are reproducible across runs
// and platforms.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "corrtensor/matrix.hpp"
#include "corrtensor/tensor.hpp"

namespace corrtensor {

struct Dataset {
  std::vector<Matrix> samples;
  std::vector<int> labels;          // empty when the source has no labels
  std::vector<bool> outlier_mask;   // one flag per sample
  std::string provenance;
  std::uint64_t seed = 0;

  bool has_labels() const { return !labels.empty(); }
};

struct TensorDataset {
  std::vector<TensorN> samples;
  std::vector<int> labels;
  std::vector<bool> outlier_mask;
  std::string provenance;
  std::uint64_t seed = 0;

  bool has_labels() const { return !labels.empty(); }
};

enum class OutlierKind { none, dummy, block, magnitude };

struct OutlierSpec {
  OutlierKind kind = OutlierKind::none;
  std::size_t count = 0;             // dummy: number of appended images
  double fraction = 0.0;             // block / magnitude: share of corrupted samples
  double magnitude = 50.0;           // magnitude multiplier m
  double block_area_fraction = 0.25; // occluded share of the image area
  std::uint64_t seed = 0;

  // "none", "dummy:count=30", "block:fraction=0.18,area=0.25",
  // "magnitude:fraction=0.05,m=50".
  static OutlierSpec parse(const std::string& text);
  std::string to_string() const;
};

// IDX (big-endian magic 0x00000803 for images, 0x00000801 for labels).
Dataset load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const std::vector<Matrix>& images);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

// Directory of P5 (grayscale) or P6 (color) files with maxval 255, loaded in
// sorted filename order. When every filename starts with digits, that integer
// prefix becomes the label.
Dataset load_pgm_dir(const std::string& dir);
TensorDataset load_ppm_dir(const std::string& dir);
void write_pgm(const std::string& path, const Matrix& image);
void write_ppm(const std::string& path, const TensorN& image);

// Functional update: returns a new dataset, never mutates the input.
// dummy appends uniform-[0,1) random images; block overwrites a random
// rectangle of the selected samples with 0/1 salt-and-pepper; magnitude
// multiplies the selected samples by m. Injected samples are flagged in
// outlier_mask.
Dataset inject_outliers(const Dataset& data, const OutlierSpec& spec);
TensorDataset inject_outliers(const TensorDataset& data, const OutlierSpec& spec);

// Stratified seeded splits; labels required.
std::pair<Dataset, Dataset> split_per_class(const Dataset& data, std::size_t per_class,
                                            std::uint64_t seed);
std::pair<Dataset, Dataset> split_fraction(const Dataset& data, double fraction,
                                           std::uint64_t seed);

// FNV-1a 64 of a file's bytes, for manifest checksums.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace corrtensor
