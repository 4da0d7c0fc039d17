#include "corrtensor/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "corrtensor/errors.hpp"
#include "corrtensor/rng.hpp"

namespace corrtensor {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset, const std::string& path) {
  if (offset + 4 > bytes.size()) {
    throw IoError(path + ": truncated header");
  }
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 3]));
}

void append_be32(std::string& bytes, std::uint32_t v) {
  bytes.push_back(static_cast<char>((v >> 24) & 0xff));
  bytes.push_back(static_cast<char>((v >> 16) & 0xff));
  bytes.push_back(static_cast<char>((v >> 8) & 0xff));
  bytes.push_back(static_cast<char>(v & 0xff));
}

unsigned char to_byte(double v) {
  const long b = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<unsigned char>(std::clamp(b, 0L, 255L));
}

// PNM header: magic already consumed; reads integers while skipping
// whitespace and '#' comments.
std::size_t skip_pnm_space(const std::string& bytes, std::size_t pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  return pos;
}

std::size_t read_pnm_int(const std::string& bytes, std::size_t pos, std::size_t& value,
                         const std::string& path) {
  pos = skip_pnm_space(bytes, pos);
  if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    throw IoError(path + ": malformed PNM header");
  }
  value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    ++pos;
  }
  return pos;
}

struct PnmImage {
  bool color = false;
  std::size_t width = 0, height = 0;
  std::vector<unsigned char> pixels;  // row-major, interleaved channels for P6
};

PnmImage load_pnm(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw IoError(path + ": not a binary PGM/PPM file");
  }
  PnmImage img;
  img.color = bytes[1] == '6';
  std::size_t pos = 2, maxval = 0;
  pos = read_pnm_int(bytes, pos, img.width, path);
  pos = read_pnm_int(bytes, pos, img.height, path);
  pos = read_pnm_int(bytes, pos, maxval, path);
  if (maxval != 255) {
    throw IoError(path + ": unsupported maxval " + std::to_string(maxval));
  }
  ++pos;  // single whitespace byte separates header from payload
  const std::size_t expected = img.width * img.height * (img.color ? 3 : 1);
  if (pos + expected > bytes.size()) {
    throw IoError(path + ": truncated payload, expected " + std::to_string(expected) +
                             " bytes, got " + std::to_string(bytes.size() - pos));
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + expected));
  return img;
}

std::vector<std::string> sorted_files_with_ext(const std::string& dir,
                                               const std::set<std::string>& exts) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (exts.count(ext)) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw IoError(dir + ": no image files found");
  return names;
}

// Label = leading integer of the filename; labels apply only if every file
// has one.
std::vector<int> labels_from_names(const std::vector<std::string>& names) {
  std::vector<int> labels;
  for (const std::string& name : names) {
    if (name.empty() || !std::isdigit(static_cast<unsigned char>(name[0]))) return {};
    labels.push_back(std::atoi(name.c_str()));
  }
  return labels;
}

std::vector<std::size_t> pick_indices(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.next_below(n - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(count);
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::size_t corrupted_count(double fraction, std::size_t n) {
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (count < 1 || count > n) {
    throw std::invalid_argument("inject_outliers: fraction " + std::to_string(fraction) +
                                " selects " + std::to_string(count) + " of " + std::to_string(n) +
                                " samples");
  }
  return count;
}

void block_rect(std::size_t rows, std::size_t cols, double area_fraction, Rng& rng,
                std::size_t& top, std::size_t& left, std::size_t& height, std::size_t& width) {
  const double side = std::sqrt(area_fraction);
  height = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(side * static_cast<double>(rows))), 1, rows);
  width = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(side * static_cast<double>(cols))), 1, cols);
  top = rng.next_below(rows - height + 1);
  left = rng.next_below(cols - width + 1);
}

}  // namespace

OutlierSpec OutlierSpec::parse(const std::string& text) {
  OutlierSpec spec;
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "none") {
    spec.kind = OutlierKind::none;
    return spec;
  } else if (kind == "dummy") {
    spec.kind = OutlierKind::dummy;
  } else if (kind == "block") {
    spec.kind = OutlierKind::block;
  } else if (kind == "magnitude") {
    spec.kind = OutlierKind::magnitude;
  } else {
    throw std::invalid_argument("unknown outlier kind '" + kind + "'");
  }

  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("outlier option '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "count") {
      spec.count = static_cast<std::size_t>(std::stoull(value));
    } else if (key == "fraction") {
      spec.fraction = std::stod(value);
    } else if (key == "m") {
      spec.magnitude = std::stod(value);
    } else if (key == "area") {
      spec.block_area_fraction = std::stod(value);
    } else {
      throw std::invalid_argument("unknown outlier option '" + key + "'");
    }
  }

  if (spec.kind == OutlierKind::block &&
      (!(spec.block_area_fraction > 0.0) || !(spec.block_area_fraction < 1.0))) {
    throw std::invalid_argument("block area fraction must be in (0, 1)");
  }
  if ((spec.kind == OutlierKind::block || spec.kind == OutlierKind::magnitude) &&
      !(spec.fraction > 0.0)) {
    throw std::invalid_argument("block/magnitude outliers need fraction > 0");
  }
  if (spec.kind == OutlierKind::magnitude && !(spec.magnitude > 0.0)) {
    throw std::invalid_argument("magnitude m must be positive");
  }
  return spec;
}

std::string OutlierSpec::to_string() const {
  char buf[128];
  switch (kind) {
    case OutlierKind::none:
      return "none";
    case OutlierKind::dummy:
      std::snprintf(buf, sizeof buf, "dummy:count=%zu", count);
      return buf;
    case OutlierKind::block:
      std::snprintf(buf, sizeof buf, "block:fraction=%g,area=%g", fraction, block_area_fraction);
      return buf;
    case OutlierKind::magnitude:
      std::snprintf(buf, sizeof buf, "magnitude:fraction=%g,m=%g", fraction, magnitude);
      return buf;
  }
  return "none";
}

Dataset load_idx_images(const std::string& path) {
  const std::string bytes = read_file(path);
  if (read_be32(bytes, 0, path) != kIdxImageMagic) {
    throw IoError(path + ": bad IDX image magic");
  }
  const std::size_t count = read_be32(bytes, 4, path);
  const std::size_t rows = read_be32(bytes, 8, path);
  const std::size_t cols = read_be32(bytes, 12, path);
  const std::size_t expected = 16 + count * rows * cols;
  if (bytes.size() != expected) {
    throw IoError(path + ": expected " + std::to_string(expected) + " bytes, got " +
                             std::to_string(bytes.size()));
  }

  Dataset data;
  data.provenance = path;
  data.samples.reserve(count);
  std::size_t pos = 16;
  for (std::size_t s = 0; s < count; ++s) {
    Matrix img(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) {
      img.data()[i] = static_cast<double>(static_cast<unsigned char>(bytes[pos++])) / 255.0;
    }
    data.samples.push_back(std::move(img));
  }
  data.outlier_mask.assign(count, false);
  return data;
}

std::vector<int> load_idx_labels(const std::string& path) {
  const std::string bytes = read_file(path);
  if (read_be32(bytes, 0, path) != kIdxLabelMagic) {
    throw IoError(path + ": bad IDX label magic");
  }
  const std::size_t count = read_be32(bytes, 4, path);
  if (bytes.size() != 8 + count) {
    throw IoError(path + ": expected " + std::to_string(8 + count) + " bytes, got " +
                             std::to_string(bytes.size()));
  }
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    labels[i] = static_cast<int>(static_cast<unsigned char>(bytes[8 + i]));
  }
  return labels;
}

void write_idx_images(const std::string& path, const std::vector<Matrix>& images) {
  std::string bytes;
  append_be32(bytes, kIdxImageMagic);
  append_be32(bytes, static_cast<std::uint32_t>(images.size()));
  const std::size_t rows = images.empty() ? 0 : images[0].rows();
  const std::size_t cols = images.empty() ? 0 : images[0].cols();
  append_be32(bytes, static_cast<std::uint32_t>(rows));
  append_be32(bytes, static_cast<std::uint32_t>(cols));
  for (const Matrix& img : images) {
    if (img.rows() != rows || img.cols() != cols) {
      throw std::invalid_argument("write_idx_images: mixed image sizes");
    }
    for (double v : img.data()) bytes.push_back(static_cast<char>(to_byte(v)));
  }
  write_file(path, bytes);
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
  std::string bytes;
  append_be32(bytes, kIdxLabelMagic);
  append_be32(bytes, static_cast<std::uint32_t>(labels.size()));
  for (int label : labels) {
    if (label < 0 || label > 255) {
      throw std::invalid_argument("write_idx_labels: label out of byte range");
    }
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(label)));
  }
  write_file(path, bytes);
}

Dataset load_pgm_dir(const std::string& dir) {
  const std::vector<std::string> names = sorted_files_with_ext(dir, {".pgm"});
  Dataset data;
  data.provenance = dir;
  for (const std::string& name : names) {
    const PnmImage img = load_pnm((std::filesystem::path(dir) / name).string());
    if (img.color) throw IoError(name + ": P6 color file in a PGM directory");
    Matrix m(img.height, img.width);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<double>(img.pixels[i]) / 255.0;
    }
    if (!data.samples.empty() && !m.same_shape(data.samples[0])) {
      throw IoError(name + ": size differs from the first image in " + dir);
    }
    data.samples.push_back(std::move(m));
  }
  data.labels = labels_from_names(names);
  data.outlier_mask.assign(data.samples.size(), false);
  return data;
}

TensorDataset load_ppm_dir(const std::string& dir) {
  const std::vector<std::string> names = sorted_files_with_ext(dir, {".ppm"});
  TensorDataset data;
  data.provenance = dir;
  for (const std::string& name : names) {
    const PnmImage img = load_pnm((std::filesystem::path(dir) / name).string());
    if (!img.color) throw IoError(name + ": P5 grayscale file in a PPM directory");
    // (height, width, 3) with channel fastest matches the interleaved payload.
    TensorN t({img.height, img.width, 3});
    for (std::size_t i = 0; i < t.size(); ++i) {
      t.data()[i] = static_cast<double>(img.pixels[i]) / 255.0;
    }
    if (!data.samples.empty() && !t.same_shape(data.samples[0])) {
      throw IoError(name + ": size differs from the first image in " + dir);
    }
    data.samples.push_back(std::move(t));
  }
  data.labels = labels_from_names(names);
  data.outlier_mask.assign(data.samples.size(), false);
  return data;
}

void write_pgm(const std::string& path, const Matrix& image) {
  std::string bytes = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) +
                      "\n255\n";
  for (double v : image.data()) bytes.push_back(static_cast<char>(to_byte(v)));
  write_file(path, bytes);
}

void write_ppm(const std::string& path, const TensorN& image) {
  if (image.order() != 3 || image.shape()[2] != 3) {
    throw std::invalid_argument("write_ppm: image must be rows x cols x 3");
  }
  std::string bytes = "P6\n" + std::to_string(image.shape()[1]) + " " +
                      std::to_string(image.shape()[0]) + "\n255\n";
  for (double v : image.data()) bytes.push_back(static_cast<char>(to_byte(v)));
  write_file(path, bytes);
}

Dataset inject_outliers(const Dataset& data, const OutlierSpec& spec) {
  Dataset out = data;
  out.seed = spec.seed;
  if (spec.kind == OutlierKind::none) return out;

  if (spec.kind == OutlierKind::dummy) {
    Rng rng(spec.seed, "inject:dummy");
    const std::size_t rows = data.samples.at(0).rows();
    const std::size_t cols = data.samples.at(0).cols();
    for (std::size_t s = 0; s < spec.count; ++s) {
      Matrix img(rows, cols);
      for (double& v : img.data()) v = rng.next_double();
      out.samples.push_back(std::move(img));
      out.outlier_mask.push_back(true);
      if (out.has_labels()) out.labels.push_back(-1);
    }
    return out;
  }

  if (spec.kind == OutlierKind::block) {
    Rng rng(spec.seed, "inject:block");
    const auto selected = pick_indices(data.samples.size(),
                                       corrupted_count(spec.fraction, data.samples.size()), rng);
    for (std::size_t idx : selected) {
      Matrix& img = out.samples[idx];
      std::size_t top, left, height, width;
      block_rect(img.rows(), img.cols(), spec.block_area_fraction, rng, top, left, height, width);
      for (std::size_t i = top; i < top + height; ++i)
        for (std::size_t j = left; j < left + width; ++j)
          img(i, j) = static_cast<double>(rng.next_u64() & 1u);
      out.outlier_mask[idx] = true;
    }
    return out;
  }

  // magnitude
  Rng rng(spec.seed, "inject:magnitude");
  const auto selected = pick_indices(data.samples.size(),
                                     corrupted_count(spec.fraction, data.samples.size()), rng);
  for (std::size_t idx : selected) {
    out.samples[idx] = scale(out.samples[idx], spec.magnitude);
    out.outlier_mask[idx] = true;
  }
  return out;
}

TensorDataset inject_outliers(const TensorDataset& data, const OutlierSpec& spec) {
  TensorDataset out = data;
  out.seed = spec.seed;
  if (spec.kind == OutlierKind::none) return out;

  if (spec.kind == OutlierKind::dummy) {
    Rng rng(spec.seed, "inject:dummy");
    const auto shape = data.samples.at(0).shape();
    for (std::size_t s = 0; s < spec.count; ++s) {
      TensorN t(shape);
      for (double& v : t.data()) v = rng.next_double();
      out.samples.push_back(std::move(t));
      out.outlier_mask.push_back(true);
      if (out.has_labels()) out.labels.push_back(-1);
    }
    return out;
  }

  if (spec.kind == OutlierKind::block) {
    Rng rng(spec.seed, "inject:block");
    const auto selected = pick_indices(data.samples.size(),
                                       corrupted_count(spec.fraction, data.samples.size()), rng);
    for (std::size_t idx : selected) {
      TensorN& t = out.samples[idx];
      const std::size_t rows = t.shape()[0];
      const std::size_t cols = t.order() > 1 ? t.shape()[1] : 1;
      std::size_t rest = 1;
      for (std::size_t m = 2; m < t.order(); ++m) rest *= t.shape()[m];
      std::size_t top, left, height, width;
      block_rect(rows, cols, spec.block_area_fraction, rng, top, left, height, width);
      for (std::size_t i = top; i < top + height; ++i)
        for (std::size_t j = left; j < left + width; ++j)
          for (std::size_t r = 0; r < rest; ++r)
            t.data()[(i * cols + j) * rest + r] = static_cast<double>(rng.next_u64() & 1u);
      out.outlier_mask[idx] = true;
    }
    return out;
  }

  Rng rng(spec.seed, "inject:magnitude");
  const auto selected = pick_indices(data.samples.size(),
                                     corrupted_count(spec.fraction, data.samples.size()), rng);
  for (std::size_t idx : selected) {
    out.samples[idx] = scale(out.samples[idx], spec.magnitude);
    out.outlier_mask[idx] = true;
  }
  return out;
}

namespace {

std::pair<Dataset, Dataset> split_selected(const Dataset& data,
                                           const std::vector<bool>& in_train) {
  Dataset train, test;
  train.provenance = data.provenance;
  test.provenance = data.provenance;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    Dataset& dst = in_train[i] ? train : test;
    dst.samples.push_back(data.samples[i]);
    dst.labels.push_back(data.labels[i]);
    dst.outlier_mask.push_back(data.outlier_mask[i]);
  }
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split_impl(const Dataset& data, std::size_t per_class,
                                       double fraction, bool use_fraction, std::uint64_t seed) {
  if (!data.has_labels()) throw std::invalid_argument("split: dataset has no labels");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.labels.size(); ++i) by_class[data.labels[i]].push_back(i);

  Rng rng(seed, "split");
  std::vector<bool> in_train(data.samples.size(), false);
  for (auto& [label, members] : by_class) {
    const std::size_t want =
        use_fraction ? static_cast<std::size_t>(
                           std::llround(fraction * static_cast<double>(members.size())))
                     : per_class;
    if (want > members.size()) {
      throw std::invalid_argument("split: class " + std::to_string(label) + " has " +
                                  std::to_string(members.size()) + " samples, requested " +
                                  std::to_string(want));
    }
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t j = i + rng.next_below(members.size() - i);
      std::swap(members[i], members[j]);
    }
    for (std::size_t i = 0; i < want; ++i) in_train[members[i]] = true;
  }
  return split_selected(data, in_train);
}

}  // namespace

std::pair<Dataset, Dataset> split_per_class(const Dataset& data, std::size_t per_class,
                                            std::uint64_t seed) {
  return split_impl(data, per_class, 0.0, false, seed);
}

std::pair<Dataset, Dataset> split_fraction(const Dataset& data, double fraction,
                                           std::uint64_t seed) {
  if (!(fraction >= 0.0) || !(fraction <= 1.0)) {
    throw std::invalid_argument("split_fraction: fraction must be in [0, 1]");
  }
  return split_impl(data, 0, fraction, true, seed);
}

std::uint64_t fnv1a_file(const std::string& path) {
  const std::string bytes = read_file(path);
  return fnv1a64(bytes);
}

}  // namespace corrtensor
