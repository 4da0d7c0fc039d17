// corrtensor experiment CLI: reconstruct / classify / cluster / loss-surface.
//
// Every command is deterministic under --seed and writes a manifest with the
// fully resolved configuration next to its outputs. Output files are staged
// with a .partial suffix and renamed once the command succeeds.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "corrtensor/classifier.hpp"
#include "corrtensor/cluster.hpp"
#include "corrtensor/corr_tensor.hpp"
#include "corrtensor/dataset.hpp"
#include "corrtensor/decomp2d.hpp"
#include "corrtensor/errors.hpp"
#include "corrtensor/rng.hpp"
#include "corrtensor/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace corrtensor;

namespace {

constexpr const char* kVersion = "corrtensor 1.0.0";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ExperimentConfig {
  std::vector<std::string> methods{"corr-2dsvd"};
  double alpha = 2.0;
  double beta = 1.0;
  double p = 2.0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::vector<std::size_t> npc;
  std::string outliers = "none";
  std::string data;
  std::string labels;
  std::string test_data;
  std::string test_labels;
  std::size_t train_per_class = 0;
  std::size_t clusters = 0;
  std::vector<double> alphas;  // cluster sweep; falls back to {alpha}
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::size_t max_iters = 100;
  double tol = 1e-5;
  double grid_min = -3.0;
  double grid_max = 3.0;
  std::size_t grid_steps = 61;
  std::string out;
  std::string config_file;
};

const std::set<std::string> kMethods2D{"2dpca", "2dsvd", "r1-2dsvd", "corr-2dsvd"};
const std::set<std::string> kMethodsAll{"2dpca", "2dsvd", "r1-2dsvd", "corr-2dsvd",
                                        "corr-tensor"};

void check_methods(const std::vector<std::string>& methods, bool allow_tensor) {
  if (methods.empty()) throw std::invalid_argument("no --method given");
  for (const std::string& m : methods) {
    if (!kMethodsAll.count(m)) throw std::invalid_argument("unknown method '" + m + "'");
    if (!allow_tensor && m == "corr-tensor") {
      throw std::invalid_argument("method 'corr-tensor' is only available for reconstruct; "
                                  "classification and clustering operate on 2D models");
    }
  }
}

// Staged output: files land as <name>.partial and are renamed on commit, so a
// failed command leaves only .partial files behind.
class OutputStage {
public:
  explicit OutputStage(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    const fs::path partial = dir_ / (name + ".partial");
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + partial.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + partial.string());
    staged_.push_back(name);
  }

  void commit() {
    for (const std::string& name : staged_) {
      fs::rename(dir_ / (name + ".partial"), dir_ / name);
    }
    staged_.clear();
  }

private:
  fs::path dir_;
  std::vector<std::string> staged_;
};

std::string checksum_path(const std::string& path) {
  if (fs::is_directory(path)) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    std::uint64_t acc = fnv1a64(path);
    for (const std::string& name : names) {
      acc ^= fnv1a64(name) ^ fnv1a_file((fs::path(path) / name).string());
      std::uint64_t state = acc;
      acc = splitmix64_next(state);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(acc));
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a_file(path)));
  return buf;
}

json config_json(const ExperimentConfig& cfg, const std::string& task) {
  json j;
  j["task"] = task;
  j["methods"] = cfg.methods;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["p"] = cfg.p;
  j["k1"] = cfg.k1;
  j["k2"] = cfg.k2;
  j["npc"] = cfg.npc;
  j["outliers"] = cfg.outliers;
  j["data"] = cfg.data;
  j["labels"] = cfg.labels;
  j["test_data"] = cfg.test_data;
  j["test_labels"] = cfg.test_labels;
  j["train_per_class"] = cfg.train_per_class;
  j["clusters"] = cfg.clusters;
  j["alphas"] = cfg.alphas;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["max_iters"] = cfg.max_iters;
  j["tol"] = cfg.tol;
  j["grid_min"] = cfg.grid_min;
  j["grid_max"] = cfg.grid_max;
  j["grid_steps"] = cfg.grid_steps;
  j["out"] = cfg.out;
  return j;
}

void write_manifest(OutputStage& stage, const ExperimentConfig& cfg, const std::string& task) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_json(cfg, task);
  json inputs = json::object();
  for (const std::string& path : {cfg.data, cfg.labels, cfg.test_data, cfg.test_labels}) {
    if (!path.empty()) inputs[path] = checksum_path(path);
  }
  manifest["inputs"] = inputs;
  stage.write("manifest.json", manifest.dump(2) + "\n");
}

// --data points at an IDX file or a directory of PGM files; labels come from
// --labels (IDX) or from numeric filename prefixes.
Dataset load_matrix_dataset(const std::string& data_path, const std::string& labels_path) {
  Dataset data = fs::is_directory(data_path) ? load_pgm_dir(data_path)
                                             : load_idx_images(data_path);
  if (!labels_path.empty()) {
    data.labels = load_idx_labels(labels_path);
  }
  if (!data.labels.empty() && data.labels.size() != data.samples.size()) {
    throw std::invalid_argument("label count " + std::to_string(data.labels.size()) +
                                " does not match sample count " +
                                std::to_string(data.samples.size()));
  }
  return data;
}

double vec_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double vec_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = vec_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

FitConfig fit_config(const ExperimentConfig& cfg, std::size_t k1, std::size_t k2) {
  FitConfig fc;
  fc.k1 = k1;
  fc.k2 = k2;
  fc.max_iters = cfg.max_iters;
  fc.tol = cfg.tol;
  fc.seed = cfg.seed;
  return fc;
}

Decomp2DModel fit_method(const std::string& method, const std::vector<Matrix>& samples,
                         const FitConfig& fc, const CorrParams& params) {
  if (method == "2dpca") return fit_2dpca(samples, fc.k2);
  if (method == "2dsvd") return fit_2dsvd(samples, fc);
  if (method == "r1-2dsvd") return fit_r1_2dsvd(samples, fc);
  if (method == "corr-2dsvd") return fit_corr_2dsvd(samples, fc, params);
  throw std::invalid_argument("unknown method '" + method + "'");
}

// ---------------------------------------------------------------- reconstruct

bool is_ppm_dir(const std::string& path) {
  if (!fs::is_directory(path)) return false;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") return true;
  }
  return false;
}

// Color-image reconstruction: 3-mode tensors, corr-tensor only, ranks
// (npc, npc, channels).
int cmd_reconstruct_color(const ExperimentConfig& cfg) {
  if (cfg.methods != std::vector<std::string>{"corr-tensor"}) {
    throw std::invalid_argument("color (PPM) data supports only --method corr-tensor");
  }
  const TensorDataset base = load_ppm_dir(cfg.data);
  const OutlierSpec spec_template = OutlierSpec::parse(cfg.outliers);
  const CorrParams params = CorrParams::make(cfg.alpha, cfg.beta, cfg.p);
  const std::size_t channels = base.samples.at(0).shape()[2];

  std::map<std::size_t, std::vector<double>> errors;
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    OutlierSpec spec = spec_template;
    spec.seed = derive_seed(cfg.seed, "trial", trial);
    const TensorDataset data = inject_outliers(base, spec);
    for (std::size_t npc : cfg.npc) {
      const TensorModel model = fit_corr_tensor(data.samples, {npc, npc, channels},
                                                fit_config(cfg, npc, npc), params);
      double acc = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < data.samples.size(); ++i) {
        if (data.outlier_mask[i]) continue;
        const TensorN rec = reconstruct_tensor(model, project_tensor(model, data.samples[i]));
        acc += frobenius_norm_sq(sub(data.samples[i], rec));
        ++n;
      }
      if (n == 0) throw std::invalid_argument("every sample is an outlier");
      errors[npc].push_back(acc / static_cast<double>(n));
    }
  }

  std::string csv = "npc,method,mean_error,std\n";
  for (const auto& [npc, v] : errors) {
    csv += std::to_string(npc) + ",corr-tensor," + fmt(vec_mean(v)) + "," + fmt(vec_std(v)) +
           "\n";
  }
  OutputStage stage(cfg.out);
  stage.write("reconstruct.csv", csv);
  write_manifest(stage, cfg, "reconstruct");
  stage.commit();
  return 0;
}

int cmd_reconstruct(const ExperimentConfig& cfg) {
  if (cfg.npc.empty()) throw std::invalid_argument("reconstruct needs --npc");
  check_methods(cfg.methods, true);
  if (is_ppm_dir(cfg.data)) return cmd_reconstruct_color(cfg);
  const Dataset base = load_matrix_dataset(cfg.data, cfg.labels);
  const OutlierSpec spec_template = OutlierSpec::parse(cfg.outliers);
  const CorrParams params = CorrParams::make(cfg.alpha, cfg.beta, cfg.p);

  // errors[npc][method] -> per-trial values
  std::map<std::size_t, std::map<std::string, std::vector<double>>> errors;
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    OutlierSpec spec = spec_template;
    spec.seed = derive_seed(cfg.seed, "trial", trial);
    const Dataset data = inject_outliers(base, spec);

    for (const std::string& method : cfg.methods) {
      for (std::size_t npc : cfg.npc) {
        double err = 0.0;
        if (method == "corr-tensor") {
          std::vector<TensorN> tensors;
          tensors.reserve(data.samples.size());
          for (const Matrix& m : data.samples) tensors.push_back(TensorN::from_matrix(m));
          const TensorModel model =
              fit_corr_tensor(tensors, {npc, npc}, fit_config(cfg, npc, npc), params);
          double acc = 0.0;
          std::size_t n = 0;
          for (std::size_t i = 0; i < tensors.size(); ++i) {
            if (data.outlier_mask[i]) continue;
            const TensorN rec = reconstruct_tensor(model, project_tensor(model, tensors[i]));
            acc += frobenius_norm_sq(sub(tensors[i], rec));
            ++n;
          }
          if (n == 0) throw std::invalid_argument("every sample is an outlier");
          err = acc / static_cast<double>(n);
        } else {
          const Decomp2DModel model =
              fit_method(method, data.samples, fit_config(cfg, npc, npc), params);
          err = reconstruction_error(model, data.samples, data.outlier_mask);
        }
        errors[npc][method].push_back(err);
      }
    }
  }

  std::string csv = "npc,method,mean_error,std\n";
  for (const auto& [npc, by_method] : errors) {
    for (const std::string& method : cfg.methods) {
      const std::vector<double>& v = by_method.at(method);
      csv += std::to_string(npc) + "," + method + "," + fmt(vec_mean(v)) + "," +
             fmt(vec_std(v)) + "\n";
    }
  }

  OutputStage stage(cfg.out);
  stage.write("reconstruct.csv", csv);
  write_manifest(stage, cfg, "reconstruct");
  stage.commit();
  return 0;
}

// ------------------------------------------------------------------- classify

int cmd_classify(const ExperimentConfig& cfg) {
  check_methods(cfg.methods, false);
  if (cfg.k1 == 0 || cfg.k2 == 0) throw std::invalid_argument("classify needs --k1/--k2");
  const Dataset train_base = load_matrix_dataset(cfg.data, cfg.labels);
  const Dataset test = load_matrix_dataset(cfg.test_data, cfg.test_labels);
  if (!train_base.has_labels() || !test.has_labels()) {
    throw std::invalid_argument("classify needs labeled train and test data");
  }
  const OutlierSpec spec_template = OutlierSpec::parse(cfg.outliers);
  const CorrParams params = CorrParams::make(cfg.alpha, cfg.beta, cfg.p);

  const std::set<int> class_set(test.labels.begin(), test.labels.end());
  const std::vector<int> class_ids(class_set.begin(), class_set.end());
  std::map<int, std::size_t> class_index;
  for (std::size_t i = 0; i < class_ids.size(); ++i) class_index[class_ids[i]] = i;

  json methods_report = json::array();
  for (const std::string& method : cfg.methods) {
    std::vector<double> accuracies;
    std::vector<std::vector<std::size_t>> confusion(
        class_ids.size(), std::vector<std::size_t>(class_ids.size(), 0));

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t trial_seed = derive_seed(cfg.seed, "trial", trial);
      Dataset train = train_base;
      if (cfg.train_per_class > 0) {
        train = split_per_class(train_base, cfg.train_per_class, trial_seed).first;
      }
      OutlierSpec spec = spec_template;
      spec.seed = trial_seed;
      train = inject_outliers(train, spec);

      const Decomp2DModel model =
          fit_method(method, train.samples, fit_config(cfg, cfg.k1, cfg.k2), params);
      const bool robust_weights = method == "corr-2dsvd";
      const ClassifierModel cls = fit_classifier(model, train.labels, params, robust_weights);

      std::size_t correct = 0;
      for (std::size_t i = 0; i < test.samples.size(); ++i) {
        const int predicted = classify(cls, test.samples[i]);
        if (predicted == test.labels[i]) ++correct;
        ++confusion[class_index.at(test.labels[i])][class_index.at(predicted)];
      }
      accuracies.push_back(static_cast<double>(correct) /
                           static_cast<double>(test.samples.size()));
    }

    json per_class = json::array();
    for (std::size_t c = 0; c < class_ids.size(); ++c) {
      std::size_t total = 0;
      for (std::size_t d = 0; d < class_ids.size(); ++d) total += confusion[c][d];
      per_class.push_back(total == 0 ? 0.0
                                     : static_cast<double>(confusion[c][c]) /
                                           static_cast<double>(total));
    }
    json entry;
    entry["method"] = method;
    entry["trial_accuracies"] = accuracies;
    entry["mean_accuracy"] = vec_mean(accuracies);
    entry["std_accuracy"] = vec_std(accuracies);
    entry["class_ids"] = class_ids;
    entry["per_class_accuracy"] = per_class;
    entry["confusion"] = confusion;
    methods_report.push_back(entry);
  }

  json report;
  report["task"] = "classify";
  report["methods"] = methods_report;
  report["config"] = config_json(cfg, "classify");

  OutputStage stage(cfg.out);
  stage.write("report.json", report.dump(2) + "\n");
  write_manifest(stage, cfg, "classify");
  stage.commit();
  return 0;
}

// -------------------------------------------------------------------- cluster

int cmd_cluster(const ExperimentConfig& cfg) {
  check_methods(cfg.methods, false);
  if (cfg.methods.size() != 1) throw std::invalid_argument("cluster takes exactly one --method");
  if (cfg.k1 == 0 || cfg.k2 == 0) throw std::invalid_argument("cluster needs --k1/--k2");
  const Dataset base = load_matrix_dataset(cfg.data, cfg.labels);
  if (!base.has_labels()) throw std::invalid_argument("cluster needs labeled data");
  const OutlierSpec spec_template = OutlierSpec::parse(cfg.outliers);

  const std::set<int> classes(base.labels.begin(), base.labels.end());
  const std::size_t k = cfg.clusters > 0 ? cfg.clusters : classes.size();
  const std::vector<double> alphas = cfg.alphas.empty() ? std::vector<double>{cfg.alpha}
                                                        : cfg.alphas;

  json runs = json::array();
  std::string sweep_csv = "alpha,ac,nmi\n";
  std::string decision_csv, similarity_csv;

  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const CorrParams params = CorrParams::make(alphas[a], cfg.beta, cfg.p);
    std::vector<double> acs, nmis;

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      OutlierSpec spec = spec_template;
      spec.seed = derive_seed(cfg.seed, "trial", trial);
      const Dataset data = inject_outliers(base, spec);

      const Decomp2DModel model =
          fit_method(cfg.methods[0], data.samples, fit_config(cfg, cfg.k1, cfg.k2), params);

      auto [centers, peaks] = density_peak_init(model.cores, k);
      const KmeansResult km = kmeans(model.cores, k, centers, spec.seed);

      // Metrics over labeled (non-injected) samples only.
      std::vector<int> truth_sub, pred_sub;
      for (std::size_t i = 0; i < data.samples.size(); ++i) {
        if (data.outlier_mask[i]) continue;
        truth_sub.push_back(data.labels[i]);
        pred_sub.push_back(km.labels[i]);
      }
      const auto [ac, mapping] = clustering_accuracy(truth_sub, pred_sub);
      acs.push_back(ac);
      nmis.push_back(nmi(truth_sub, pred_sub));

      if (a == 0 && trial == 0) {
        decision_csv = "index,rho,delta,selected\n";
        for (std::size_t i = 0; i < peaks.rho.size(); ++i) {
          const bool selected = std::find(peaks.selected.begin(), peaks.selected.end(), i) !=
                                peaks.selected.end();
          decision_csv += std::to_string(i) + "," + fmt(peaks.rho[i]) + "," +
                          fmt(peaks.delta[i]) + "," + (selected ? "1" : "0") + "\n";
        }

        // Cluster-sorted kernel similarity matrix.
        const std::size_t n = model.cores.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
          return km.labels[x] < km.labels[y];
        });
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double dist = std::sqrt(
                frobenius_norm_sq(sub(model.cores[order[i]], model.cores[order[j]])));
            similarity_csv += fmt(ggd_kernel(dist, params) / params.gamma);
            similarity_csv += (j + 1 == n) ? "\n" : ",";
          }
        }
      }
    }

    json run;
    run["alpha"] = alphas[a];
    run["trial_ac"] = acs;
    run["trial_nmi"] = nmis;
    run["mean_ac"] = vec_mean(acs);
    run["std_ac"] = vec_std(acs);
    run["mean_nmi"] = vec_mean(nmis);
    run["std_nmi"] = vec_std(nmis);
    run["k"] = k;
    runs.push_back(run);
    sweep_csv += fmt(alphas[a]) + "," + fmt(vec_mean(acs)) + "," + fmt(vec_mean(nmis)) + "\n";
  }

  json report;
  report["task"] = "cluster";
  report["runs"] = runs;
  report["config"] = config_json(cfg, "cluster");

  OutputStage stage(cfg.out);
  stage.write("report.json", report.dump(2) + "\n");
  stage.write("alpha_sweep.csv", sweep_csv);
  stage.write("decision_graph.csv", decision_csv);
  stage.write("similarity.csv", similarity_csv);
  write_manifest(stage, cfg, "cluster");
  stage.commit();
  return 0;
}

// --------------------------------------------------------------- loss-surface

int cmd_loss_surface(const ExperimentConfig& cfg) {
  if (cfg.grid_steps < 2 || !(cfg.grid_max > cfg.grid_min)) {
    throw std::invalid_argument("loss-surface needs grid_max > grid_min and >= 2 steps");
  }
  const CorrParams params = CorrParams::make(cfg.alpha, cfg.beta, cfg.p);
  const double step =
      (cfg.grid_max - cfg.grid_min) / static_cast<double>(cfg.grid_steps - 1);

  std::string csv = "a1,a2,loss\n";
  for (std::size_t i = 0; i < cfg.grid_steps; ++i) {
    const double a1 = cfg.grid_min + step * static_cast<double>(i);
    for (std::size_t j = 0; j < cfg.grid_steps; ++j) {
      const double a2 = cfg.grid_min + step * static_cast<double>(j);
      const std::vector<double> residual{std::hypot(a1, a2)};
      csv += fmt(a1) + "," + fmt(a2) + "," + fmt(corr_ploss(residual, params)) + "\n";
    }
  }

  OutputStage stage(cfg.out);
  stage.write("loss_surface.csv", csv);
  write_manifest(stage, cfg, "loss-surface");
  stage.commit();
  return 0;
}

// -------------------------------------------------------------- config / main

// Flags override the optional JSON config file; only keys left at their
// defaults on the command line are taken from the file.
void merge_config_file(ExperimentConfig& cfg, CLI::App* cmd) {
  if (cfg.config_file.empty()) return;
  std::ifstream in(cfg.config_file);
  if (!in) throw IoError("cannot open config file " + cfg.config_file);
  json j;
  in >> j;

  const auto given = [&](const std::string& flag) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  const auto apply = [&](const char* key, const char* flag, auto& member) {
    if (j.contains(key) && !given(flag)) member = j.at(key).get<std::decay_t<decltype(member)>>();
  };
  apply("methods", "--method", cfg.methods);
  apply("alpha", "--alpha", cfg.alpha);
  apply("beta", "--beta", cfg.beta);
  apply("p", "--p", cfg.p);
  apply("k1", "--k1", cfg.k1);
  apply("k2", "--k2", cfg.k2);
  apply("npc", "--npc", cfg.npc);
  apply("outliers", "--outliers", cfg.outliers);
  apply("data", "--data", cfg.data);
  apply("labels", "--labels", cfg.labels);
  apply("test_data", "--test-data", cfg.test_data);
  apply("test_labels", "--test-labels", cfg.test_labels);
  apply("train_per_class", "--train-per-class", cfg.train_per_class);
  apply("clusters", "--k", cfg.clusters);
  apply("alphas", "--alpha-sweep", cfg.alphas);
  apply("seed", "--seed", cfg.seed);
  apply("trials", "--trials", cfg.trials);
  apply("max_iters", "--max-iters", cfg.max_iters);
  apply("tol", "--tol", cfg.tol);
  apply("grid_min", "--grid-min", cfg.grid_min);
  apply("grid_max", "--grid-max", cfg.grid_max);
  apply("grid_steps", "--grid-steps", cfg.grid_steps);
  apply("out", "--out", cfg.out);
}

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--method", cfg.methods, "decomposition method (repeatable)");
  cmd->add_option("--alpha", cfg.alpha, "error power alpha");
  cmd->add_option("--beta", cfg.beta, "kernel width beta");
  cmd->add_option("--p", cfg.p, "loss power p");
  cmd->add_option("--k1", cfg.k1, "left rank");
  cmd->add_option("--k2", cfg.k2, "right rank");
  cmd->add_option("--outliers", cfg.outliers,
                  "outlier spec: none | dummy:count=N | block:fraction=F,area=A | "
                  "magnitude:fraction=F,m=M");
  cmd->add_option("--data", cfg.data, "IDX image file or directory of PGM files");
  cmd->add_option("--labels", cfg.labels, "IDX label file");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--trials", cfg.trials, "number of trials");
  cmd->add_option("--max-iters", cfg.max_iters, "fit iteration cap");
  cmd->add_option("--tol", cfg.tol, "relative objective tolerance");
  cmd->add_option("--out", cfg.out, "output directory")->required();
  cmd->add_option("--config", cfg.config_file, "JSON config file (flags override)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust correntropy 2D/tensor decomposition experiments"};
  app.require_subcommand(1);

  ExperimentConfig cfg;

  CLI::App* rec = app.add_subcommand("reconstruct", "reconstruction error over an NPC grid");
  add_common_options(rec, cfg);
  rec->add_option("--npc", cfg.npc, "principal component counts (repeatable)");

  CLI::App* cls = app.add_subcommand("classify", "center-based classification accuracy");
  add_common_options(cls, cfg);
  cls->add_option("--test-data", cfg.test_data, "IDX image file or PGM directory");
  cls->add_option("--test-labels", cfg.test_labels, "IDX label file");
  cls->add_option("--train-per-class", cfg.train_per_class,
                  "stratified training subset size (0 = all)");

  CLI::App* clu = app.add_subcommand("cluster", "k-means on cores with density-peak init");
  add_common_options(clu, cfg);
  clu->add_option("--k", cfg.clusters, "cluster count (default: number of classes)");
  clu->add_option("--alpha-sweep", cfg.alphas, "alpha values for a sweep (repeatable)");

  CLI::App* surf = app.add_subcommand("loss-surface", "correntropy loss grid as CSV");
  add_common_options(surf, cfg);
  surf->add_option("--grid-min", cfg.grid_min, "grid lower bound");
  surf->add_option("--grid-max", cfg.grid_max, "grid upper bound");
  surf->add_option("--grid-steps", cfg.grid_steps, "points per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    merge_config_file(cfg, active);
    if (active == rec) return cmd_reconstruct(cfg);
    if (active == cls) return cmd_classify(cfg);
    if (active == clu) return cmd_cluster(cfg);
    return cmd_loss_surface(cfg);
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  }
}
