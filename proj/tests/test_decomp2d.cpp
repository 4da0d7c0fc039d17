#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "corrtensor/decomp2d.hpp"
#include "test_util.hpp"

using namespace corrtensor;
using namespace corrtensor::testutil;

namespace {

void check_orthonormal(const Matrix& basis, double tol = 1e-10) {
  const Matrix gram = matmul(transpose(basis), basis);
  CHECK(max_abs(sub(gram, Matrix::identity(basis.cols()))) <= tol);
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += v[i];
  return acc / static_cast<double>(end - begin);
}

}  // namespace

TEST_CASE("fit_2dpca basics") {
  SUBCASE("two identical samples") {
    const Matrix x(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Decomp2DModel model = fit_2dpca({x, x}, 2);
    check_orthonormal(model.right);
    CHECK(reconstruction_error(model, {x, x}) <= 1e-20);
  }

  SUBCASE("signal confined to first two columns") {
    Rng rng(101);
    std::vector<Matrix> samples;
    for (int s = 0; s < 6; ++s) {
      Matrix x(5, 4);
      for (std::size_t i = 0; i < 5; ++i) {
        x(i, 0) = rng.next_double();
        x(i, 1) = rng.next_double();
        x(i, 2) = 0.25;   // constant across samples, vanishes after centering
        x(i, 3) = -0.75;
      }
      samples.push_back(std::move(x));
    }
    const Decomp2DModel model = fit_2dpca(samples, 2);
    Matrix expected(4, 4);
    expected(0, 0) = 1.0;
    expected(1, 1) = 1.0;
    CHECK(max_abs(sub(projector(model.right), expected)) <= 1e-8);
  }

  SUBCASE("full basis reconstructs exactly") {
    Rng rng(103);
    std::vector<Matrix> samples;
    for (int s = 0; s < 10; ++s) samples.push_back(random_matrix(6, 5, rng));
    const Decomp2DModel model = fit_2dpca(samples, 5);
    CHECK(reconstruction_error(model, samples) <= 1e-10);
    for (double w : model.weights.weights) CHECK(w == 1.0);
  }

  SUBCASE("errors") {
    const Matrix x(3, 3);
    CHECK_THROWS_AS(fit_2dpca({x}, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_2dpca({x, Matrix(2, 2)}, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_2dpca({x, x}, 4), std::invalid_argument);
  }
}

TEST_CASE("fit_2dsvd") {
  Rng rng(107);

  SUBCASE("full ranks give zero residual") {
    std::vector<Matrix> samples;
    for (int s = 0; s < 6; ++s) samples.push_back(random_matrix(4, 3, rng));
    FitConfig config;
    config.k1 = 4;
    config.k2 = 3;
    const Decomp2DModel model = fit_2dsvd(samples, config);
    double total = 0.0;
    for (double e : model.weights.residuals) total += e;
    CHECK(total <= 1e-10);
    CHECK(model.converged);
  }

  SUBCASE("rank-1 synthetic recovery") {
    const Matrix u = random_matrix(6, 1, rng);
    const Matrix v = random_matrix(5, 1, rng);
    const Matrix base = random_matrix(6, 5, rng, 0.0, 1.0);
    std::vector<Matrix> samples;
    for (int s = 0; s < 8; ++s) {
      const double c = 2.0 * rng.next_double() - 1.0;
      samples.push_back(add(base, scale(matmul(u, transpose(v)), c)));
    }
    FitConfig config;
    config.k1 = 1;
    config.k2 = 1;
    const Decomp2DModel model = fit_2dsvd(samples, config);

    const Matrix pu = scale(matmul(u, transpose(u)), 1.0 / frobenius_norm_sq(u));
    const Matrix pv = scale(matmul(v, transpose(v)), 1.0 / frobenius_norm_sq(v));
    CHECK(max_abs(sub(projector(model.left), pu)) <= 1e-8);
    CHECK(max_abs(sub(projector(model.right), pv)) <= 1e-8);
    CHECK(model.trace.back() <= 1e-10);
  }

  SUBCASE("objective trace is non-increasing") {
    std::vector<Matrix> samples;
    for (int s = 0; s < 10; ++s) samples.push_back(random_matrix(7, 5, rng));
    FitConfig config;
    config.k1 = 3;
    config.k2 = 3;
    config.tol = 1e-12;
    const Decomp2DModel model = fit_2dsvd(samples, config);
    REQUIRE(model.trace.size() >= 3);
    for (std::size_t t = 1; t < model.trace.size(); ++t) {
      CHECK(model.trace[t] <= model.trace[t - 1] * (1.0 + 1e-12) + 1e-12);
    }
    check_orthonormal(model.left);
    check_orthonormal(model.right);
  }
}

TEST_CASE("fit_r1_2dsvd") {
  Rng rng(109);

  SUBCASE("equal residuals reduce to 2dsvd subspaces") {
    // Two samples always have equal residual energies (X_hat_1 = -X_hat_2),
    // so the reweighting is uniform.
    std::vector<Matrix> samples{random_matrix(6, 5, rng), random_matrix(6, 5, rng)};
    FitConfig config;
    config.k1 = 2;
    config.k2 = 2;
    const Decomp2DModel ls = fit_2dsvd(samples, config);
    const Decomp2DModel r1 = fit_r1_2dsvd(samples, config);
    CHECK(max_abs(sub(projector(ls.left), projector(r1.left))) <= 1e-8);
    CHECK(max_abs(sub(projector(ls.right), projector(r1.right))) <= 1e-8);
  }

  SUBCASE("magnitude outlier is down-weighted") {
    std::vector<Matrix> samples = structured_samples(14, 8, 8, 2, 0.02, rng);
    samples.push_back(scale(samples[0], 50.0));
    FitConfig config;
    config.k1 = 3;
    config.k2 = 3;
    const Decomp2DModel model = fit_r1_2dsvd(samples, config);
    std::vector<double> sorted = model.weights.weights;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    CHECK(model.weights.weights.back() < 0.2 * median);
  }

  SUBCASE("full ranks hit the clamp but stay orthonormal") {
    std::vector<Matrix> samples{random_matrix(4, 3, rng), random_matrix(4, 3, rng),
                                random_matrix(4, 3, rng)};
    FitConfig config;
    config.k1 = 4;
    config.k2 = 3;
    const Decomp2DModel model = fit_r1_2dsvd(samples, config);
    check_orthonormal(model.left);
    check_orthonormal(model.right);
    for (double w : model.weights.weights) CHECK(std::isfinite(w));
  }
}

TEST_CASE("fit_corr_2dsvd limit equivalence with 2dsvd") {
  // alpha = 2 with a huge beta makes lambda ~ 1e-12: weights are uniform to
  // within 1e-11 and the solver must match plain 2dsvd.
  Rng rng(113);
  std::vector<Matrix> samples = structured_samples(20, 8, 6, 3, 1e-6, rng);
  FitConfig config;
  config.k1 = 3;
  config.k2 = 3;
  const Decomp2DModel ls = fit_2dsvd(samples, config);
  const Decomp2DModel corr = fit_corr_2dsvd(samples, config, CorrParams::make(2.0, 1e6));
  CHECK(max_principal_angle(ls.left, corr.left) < 1e-6);
  CHECK(max_principal_angle(ls.right, corr.right) < 1e-6);
}

TEST_CASE("fit_corr_2dsvd robust mean and weights") {
  Rng rng(127);
  const CorrParams params = CorrParams::make(1.6, 0.8);

  SUBCASE("clean data: mean is a convex combination of samples") {
    std::vector<Matrix> samples = structured_samples(12, 9, 7, 2, 0.02, rng);
    FitConfig config;
    config.k1 = 3;
    config.k2 = 3;
    const Decomp2DModel model = fit_corr_2dsvd(samples, config, params);
    for (double w : model.weights.weights) CHECK(w >= 0.0);
    // Convexity puts every mean entry inside the per-entry sample hull.
    for (std::size_t i = 0; i < model.mean.size(); ++i) {
      double lo = samples[0].data()[i], hi = samples[0].data()[i];
      for (const Matrix& x : samples) {
        lo = std::min(lo, x.data()[i]);
        hi = std::max(hi, x.data()[i]);
      }
      CHECK(model.mean.data()[i] >= lo - 1e-12);
      CHECK(model.mean.data()[i] <= hi + 1e-12);
    }
  }

  SUBCASE("dummy outliers are crushed") {
    std::vector<Matrix> samples = structured_samples(20, 16, 16, 3, 0.02, rng);
    const std::size_t n_inliers = samples.size();
    for (Matrix& m : dummy_images(4, 16, 16, rng)) samples.push_back(std::move(m));

    FitConfig config;
    config.k1 = 6;
    config.k2 = 6;
    const Decomp2DModel model = fit_corr_2dsvd(samples, config, params);

    const double inlier_mean = mean_of(model.weights.weights, 0, n_inliers);
    const double outlier_mean = mean_of(model.weights.weights, n_inliers, samples.size());
    CHECK(outlier_mean < 0.2 * inlier_mean);

    // Weights stay within (0, w(e_floor)].
    const double w_max = sample_weight(kResidualFloor, params);
    for (double w : model.weights.weights) {
      CHECK(w > 0.0);
      CHECK(w <= w_max);
    }
    check_orthonormal(model.left);
    check_orthonormal(model.right);
    CHECK(model.converged);
  }

  SUBCASE("determinism") {
    std::vector<Matrix> samples = structured_samples(10, 6, 5, 2, 0.05, rng);
    FitConfig config;
    config.k1 = 2;
    config.k2 = 2;
    const Decomp2DModel m1 = fit_corr_2dsvd(samples, config, params);
    const Decomp2DModel m2 = fit_corr_2dsvd(samples, config, params);
    CHECK(m1.trace == m2.trace);
    for (std::size_t i = 0; i < m1.left.size(); ++i) {
      CHECK(m1.left.data()[i] == m2.left.data()[i]);
    }
    for (std::size_t i = 0; i < m1.mean.size(); ++i) {
      CHECK(m1.mean.data()[i] == m2.mean.data()[i]);
    }
  }

  SUBCASE("non-convergence returns best iterate with flag") {
    std::vector<Matrix> samples = structured_samples(10, 6, 5, 2, 0.3, rng);
    FitConfig config;
    config.k1 = 2;
    config.k2 = 2;
    config.max_iters = 1;
    config.tol = 1e-30;
    const Decomp2DModel model = fit_corr_2dsvd(samples, config, params);
    CHECK_FALSE(model.converged);
    check_orthonormal(model.left);
    for (double w : model.weights.weights) CHECK(std::isfinite(w));
  }
}

TEST_CASE("stored cores satisfy the projection identity for every fitter") {
  Rng rng(151);
  std::vector<Matrix> samples = structured_samples(9, 6, 5, 2, 0.05, rng);
  FitConfig config;
  config.k1 = 2;
  config.k2 = 2;
  const CorrParams params = CorrParams::make(1.6, 0.8);

  const std::vector<Decomp2DModel> models{
      fit_2dpca(samples, 2), fit_2dsvd(samples, config), fit_r1_2dsvd(samples, config),
      fit_corr_2dsvd(samples, config, params)};
  for (const Decomp2DModel& model : models) {
    REQUIRE(model.cores.size() == samples.size());
    const Matrix lt = transpose(model.left);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Matrix expected = matmul(matmul(lt, sub(samples[i], model.mean)), model.right);
      CHECK(max_abs(sub(model.cores[i], expected)) <= 1e-10);
    }
  }
}

TEST_CASE("weighted mean structure is scale invariant") {
  // The robust mean sum(w_i X_i) / sum(w_i) must not change when every weight
  // is multiplied by one positive constant.
  Rng rng(131);
  std::vector<Matrix> samples;
  std::vector<double> weights;
  for (int s = 0; s < 7; ++s) {
    samples.push_back(random_matrix(4, 3, rng));
    weights.push_back(0.01 + rng.next_double());
  }
  const auto weighted_mean = [&](double factor) {
    Matrix acc(4, 3);
    double total = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      acc = add(acc, scale(samples[s], factor * weights[s]));
      total += factor * weights[s];
    }
    return scale(acc, 1.0 / total);
  };
  CHECK(max_abs(sub(weighted_mean(1.0), weighted_mean(137.0))) <= 1e-12);
}

TEST_CASE("rotation invariance of the fitted projectors") {
  Rng rng(137);
  std::vector<Matrix> samples = structured_samples(12, 7, 6, 2, 1e-3, rng);
  const Matrix p = random_orthogonal(7, rng);
  const Matrix q = random_orthogonal(6, rng);
  std::vector<Matrix> rotated;
  for (const Matrix& x : samples) rotated.push_back(matmul(matmul(p, x), transpose(q)));

  FitConfig config;
  config.k1 = 2;
  config.k2 = 2;

  SUBCASE("2dsvd") {
    const Decomp2DModel base = fit_2dsvd(samples, config);
    const Decomp2DModel rot = fit_2dsvd(rotated, config);
    const Matrix expected_left = matmul(matmul(p, projector(base.left)), transpose(p));
    const Matrix expected_right = matmul(matmul(q, projector(base.right)), transpose(q));
    CHECK(max_abs(sub(projector(rot.left), expected_left)) <= 1e-6);
    CHECK(max_abs(sub(projector(rot.right), expected_right)) <= 1e-6);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(rot.weights.residuals[i] ==
            doctest::Approx(base.weights.residuals[i]).epsilon(1e-8));
    }
  }

  SUBCASE("corr-2dsvd") {
    const CorrParams params = CorrParams::make(1.6, 0.8);
    const Decomp2DModel base = fit_corr_2dsvd(samples, config, params);
    const Decomp2DModel rot = fit_corr_2dsvd(rotated, config, params);
    const Matrix expected_left = matmul(matmul(p, projector(base.left)), transpose(p));
    const Matrix expected_right = matmul(matmul(q, projector(base.right)), transpose(q));
    CHECK(max_abs(sub(projector(rot.left), expected_left)) <= 1e-6);
    CHECK(max_abs(sub(projector(rot.right), expected_right)) <= 1e-6);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(rot.weights.residuals[i] ==
            doctest::Approx(base.weights.residuals[i]).epsilon(1e-8));
    }
  }

  SUBCASE("r1-2dsvd") {
    const Decomp2DModel base = fit_r1_2dsvd(samples, config);
    const Decomp2DModel rot = fit_r1_2dsvd(rotated, config);
    const Matrix expected_left = matmul(matmul(p, projector(base.left)), transpose(p));
    const Matrix expected_right = matmul(matmul(q, projector(base.right)), transpose(q));
    CHECK(max_abs(sub(projector(rot.left), expected_left)) <= 1e-6);
    CHECK(max_abs(sub(projector(rot.right), expected_right)) <= 1e-6);
  }

  SUBCASE("2dpca right projector") {
    const Decomp2DModel base = fit_2dpca(samples, 2);
    const Decomp2DModel rot = fit_2dpca(rotated, 2);
    const Matrix expected_right = matmul(matmul(q, projector(base.right)), transpose(q));
    CHECK(max_abs(sub(projector(rot.right), expected_right)) <= 1e-6);
  }
}

TEST_CASE("project and reconstruct") {
  Rng rng(139);
  std::vector<Matrix> samples = structured_samples(8, 5, 4, 2, 0.1, rng);

  SUBCASE("x = mean gives zero core; full rank is the identity") {
    FitConfig config;
    config.k1 = 5;
    config.k2 = 4;
    const Decomp2DModel model = fit_2dsvd(samples, config);
    CHECK(max_abs(project(model, model.mean)) <= 1e-12);

    const Matrix x = samples[3];
    const Matrix rebuilt = reconstruct(model, project(model, x));
    CHECK(max_abs(sub(rebuilt, x)) <= 1e-10);

    CHECK(max_abs(sub(reconstruct(model, Matrix(5, 4)), model.mean)) == 0.0);
  }

  SUBCASE("rank-deficient residual identity") {
    FitConfig config;
    config.k1 = 2;
    config.k2 = 2;
    const Decomp2DModel model = fit_2dsvd(samples, config);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Matrix rebuilt = reconstruct(model, project(model, samples[i]));
      const double err = frobenius_norm_sq(sub(samples[i], rebuilt));
      CHECK(err == doctest::Approx(model.weights.residuals[i]).epsilon(1e-8));
    }
  }

  SUBCASE("shape errors") {
    FitConfig config;
    config.k1 = 2;
    config.k2 = 2;
    const Decomp2DModel model = fit_2dsvd(samples, config);
    CHECK_THROWS_AS(project(model, Matrix(4, 4)), std::invalid_argument);
    CHECK_THROWS_AS(reconstruct(model, Matrix(3, 2)), std::invalid_argument);
  }
}

TEST_CASE("reconstruction_error") {
  Rng rng(149);
  std::vector<Matrix> samples = structured_samples(9, 6, 5, 4, 0.05, rng);

  SUBCASE("full rank is zero") {
    FitConfig config;
    config.k1 = 6;
    config.k2 = 5;
    const Decomp2DModel model = fit_2dsvd(samples, config);
    CHECK(reconstruction_error(model, samples) <= 1e-10);
  }

  SUBCASE("exclusion semantics") {
    FitConfig config;
    config.k1 = 2;
    config.k2 = 2;
    const Decomp2DModel model = fit_2dsvd(samples, config);
    std::vector<bool> all_but_one(samples.size(), true);
    all_but_one[4] = false;
    const Matrix rebuilt = reconstruct(model, project(model, samples[4]));
    CHECK(reconstruction_error(model, samples, all_but_one) ==
          doctest::Approx(frobenius_norm_sq(sub(samples[4], rebuilt))).epsilon(1e-12));

    CHECK_THROWS_AS(reconstruction_error(model, samples, std::vector<bool>(samples.size(), true)),
                    std::invalid_argument);
  }

  SUBCASE("monotone non-increasing in the rank") {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 5; ++k) {
      FitConfig config;
      config.k1 = k;
      config.k2 = k;
      const Decomp2DModel model = fit_2dsvd(samples, config);
      const double err = reconstruction_error(model, samples);
      CHECK(err <= previous + 1e-9);
      previous = err;
    }
  }
}
