// CLI-level checks: output formats, config-file precedence, exit codes, and
// the loss-surface values against the library loss as oracle. argv[1] is the
// CLI binary path.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "corrtensor/correntropy.hpp"
#include "corrtensor/dataset.hpp"
#include "corrtensor/rng.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace corrtensor;
using namespace corrtensor::testutil;

namespace {

std::string g_cli;
int g_failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::printf("[ok] %s\n", what.c_str());
  } else {
    std::printf("[FAILED] %s\n", what.c_str());
    ++g_failures;
  }
}

int run(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// (a1, a2) -> loss rows from loss_surface.csv.
std::map<std::pair<double, double>, double> parse_surface(const fs::path& path) {
  std::map<std::pair<double, double>, double> out;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string a1, a2, loss;
    std::getline(ss, a1, ',');
    std::getline(ss, a2, ',');
    std::getline(ss, loss, ',');
    out[{std::stod(a1), std::stod(a2)}] = std::stod(loss);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::printf("usage: test_cli <cli-binary>\n");
    return 1;
  }
  g_cli = argv[1];
  const fs::path dir = fs::temp_directory_path() / "corrtensor_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // --- loss surface against the library loss ---------------------------
  {
    const fs::path out = dir / "surface";
    check(run("loss-surface --alpha 2 --beta 0.8 --grid-min -3 --grid-max 3 --grid-steps 7"
              " --out " + out.string()) == 0,
          "loss-surface succeeds");
    const auto grid = parse_surface(out / "loss_surface.csv");
    check(grid.size() == 49, "loss-surface emits steps^2 rows");

    const CorrParams params = CorrParams::make(2.0, 0.8);
    bool zero_ok = grid.count({0.0, 0.0}) && grid.at({0.0, 0.0}) == 0.0;
    check(zero_ok, "loss at the origin is zero");

    bool symmetric = true, matches_oracle = true;
    for (const auto& [point, loss] : grid) {
      symmetric &= grid.at({-point.first, -point.second}) == loss;
      const std::vector<double> residual{std::hypot(point.first, point.second)};
      matches_oracle &= std::abs(loss - corr_loss(residual, params)) <= 1e-12;
    }
    check(symmetric, "loss(a1,a2) equals loss(-a1,-a2)");
    check(matches_oracle, "grid values match corr_loss directly");
  }

  // --- fixture for data-driven commands --------------------------------
  Rng rng(66);
  std::vector<Matrix> images;
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) {
    const Matrix pattern = random_matrix(10, 10, rng, 0.0, 1.0);
    for (int s = 0; s < 15; ++s) {
      Matrix x = pattern;
      for (double& v : x.data()) {
        v += 0.05 * (2.0 * rng.next_double() - 1.0);
        v = std::clamp(v, 0.0, 1.0);
      }
      images.push_back(std::move(x));
      labels.push_back(c);
    }
  }
  const std::string data_path = (dir / "data.idx").string();
  const std::string label_path = (dir / "labels.idx").string();
  write_idx_images(data_path, images);
  write_idx_labels(label_path, labels);

  // --- reconstruct: CSV shape and trend on clean data ------------------
  {
    const fs::path out = dir / "rec";
    check(run("reconstruct --method 2dsvd --data " + data_path +
              " --npc 2 --npc 4 --npc 6 --trials 1 --seed 3 --out " + out.string()) == 0,
          "reconstruct succeeds");
    std::ifstream in(out / "reconstruct.csv");
    std::string line;
    std::getline(in, line);
    check(line == "npc,method,mean_error,std", "reconstruct CSV header");
    std::vector<double> errors;
    while (std::getline(in, line)) {
      const std::size_t last = line.rfind(',');
      const std::size_t prev = line.rfind(',', last - 1);
      errors.push_back(std::stod(line.substr(prev + 1, last - prev - 1)));
    }
    check(errors.size() == 3, "one reconstruct row per npc");
    check(errors[0] >= errors[1] && errors[1] >= errors[2],
          "clean-data error is non-increasing in npc");
  }

  // --- classify: two methods in one JSON report ------------------------
  {
    const fs::path out = dir / "cls";
    check(run("classify --method corr-2dsvd --method 2dsvd --data " + data_path + " --labels " +
              label_path + " --test-data " + data_path + " --test-labels " + label_path +
              " --alpha 2 --beta 0.8 --k1 3 --k2 3 --trials 1 --seed 3 --out " + out.string()) ==
              0,
          "classify succeeds");
    json report = json::parse(slurp(out / "report.json"));
    check(report["methods"].size() == 2, "classify reports both methods");
    bool fields = true;
    for (const auto& entry : report["methods"]) {
      fields &= entry.contains("mean_accuracy") && entry.contains("std_accuracy") &&
                entry.contains("confusion") && entry.contains("per_class_accuracy");
    }
    check(fields, "classify report carries accuracy and confusion fields");
    check(report["methods"][0]["mean_accuracy"].get<double>() > 0.9,
          "clean separable data classifies accurately");
  }

  // --- cluster: output files and row counts ----------------------------
  {
    const fs::path out = dir / "clu";
    check(run("cluster --method 2dsvd --data " + data_path + " --labels " + label_path +
              " --alpha 2 --beta 0.8 --k1 3 --k2 3 --trials 1 --seed 3 --out " + out.string()) ==
              0,
          "cluster succeeds");
    std::ifstream graph(out / "decision_graph.csv");
    std::string line;
    std::getline(graph, line);
    check(line == "index,rho,delta,selected", "decision graph header");
    std::size_t rows = 0;
    while (std::getline(graph, line)) ++rows;
    check(rows == images.size(), "one decision-graph row per sample");

    std::ifstream sim(out / "similarity.csv");
    std::size_t sim_rows = 0, sim_cols = 0;
    while (std::getline(sim, line)) {
      if (sim_rows == 0) {
        sim_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      }
      ++sim_rows;
    }
    check(sim_rows == images.size() && sim_cols == images.size(),
          "similarity matrix is n x n");

    json report = json::parse(slurp(out / "report.json"));
    check(report["runs"][0]["mean_ac"].get<double>() > 0.9, "separable data clusters well");
  }

  // --- config file precedence ------------------------------------------
  {
    const fs::path cfg_path = dir / "config.json";
    std::ofstream(cfg_path) << R"({"alpha": 3.0, "grid_steps": 5})";
    const fs::path out_a = dir / "cfg_a";
    check(run("loss-surface --beta 0.8 --config " + cfg_path.string() + " --out " +
              out_a.string()) == 0,
          "loss-surface with config file succeeds");
    json manifest_a = json::parse(slurp(out_a / "manifest.json"));
    check(manifest_a["config"]["alpha"].get<double>() == 3.0 &&
              manifest_a["config"]["grid_steps"].get<int>() == 5,
          "config file fills unset options");

    const fs::path out_b = dir / "cfg_b";
    check(run("loss-surface --beta 0.8 --alpha 2 --config " + cfg_path.string() + " --out " +
              out_b.string()) == 0,
          "loss-surface with config file and flag succeeds");
    json manifest_b = json::parse(slurp(out_b / "manifest.json"));
    check(manifest_b["config"]["alpha"].get<double>() == 2.0,
          "command-line flag overrides the config file");
    check(manifest_b["version"] == "corrtensor 1.0.0", "manifest records the version");
  }

  // --- manifest checksums ------------------------------------------------
  {
    json manifest = json::parse(slurp(dir / "rec" / "manifest.json"));
    const std::string recorded = manifest["inputs"][data_path].get<std::string>();
    char expected[32];
    std::snprintf(expected, sizeof expected, "fnv1a:%016llx",
                  static_cast<unsigned long long>(fnv1a_file(data_path)));
    check(recorded == expected, "manifest checksum matches the input file");
  }

  // --- alpha sweep -------------------------------------------------------
  {
    const fs::path out = dir / "sweep";
    check(run("cluster --method corr-2dsvd --data " + data_path + " --labels " + label_path +
              " --alpha-sweep 1.6 --alpha-sweep 2 --alpha-sweep 4 --beta 0.8 --k1 3 --k2 3"
              " --trials 1 --seed 3 --out " + out.string()) == 0,
          "alpha sweep succeeds");
    std::ifstream in(out / "alpha_sweep.csv");
    std::string line;
    std::getline(in, line);
    check(line == "alpha,ac,nmi", "alpha sweep header");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    check(rows == 3, "one sweep row per alpha");
  }

  // --- error exit codes --------------------------------------------------
  check(run("reconstruct --method sparkle --data " + data_path + " --npc 2 --out " +
            (dir / "e1").string()) == 1,
        "unknown method exits 1");
  {
    const std::string short_labels = (dir / "short.idx").string();
    write_idx_labels(short_labels, {0, 1, 2});
    check(run("classify --method 2dsvd --data " + data_path + " --labels " + short_labels +
              " --test-data " + data_path + " --test-labels " + label_path +
              " --k1 3 --k2 3 --out " + (dir / "e4").string()) == 1,
          "image/label count mismatch exits 1");
  }
  check(run("reconstruct --method 2dsvd --data /does/not/exist.idx --npc 2 --out " +
            (dir / "e2").string()) == 2,
        "missing data file exits 2");
  check(run("classify --method corr-2dsvd --data " + data_path + " --labels " + label_path +
            " --test-data " + data_path + " --test-labels " + label_path +
            " --k1 99 --k2 99 --out " + (dir / "e3").string()) == 1,
        "out-of-range rank exits 1");

  if (g_failures == 0) std::printf("all CLI checks passed\n");
  return g_failures == 0 ? 0 : 1;
}
