#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ffasm/errors.hpp"
#include "ffasm/metrics.hpp"
#include "ffasm/model.hpp"
#include "ffasm/rng.hpp"
#include "ffasm/simulate.hpp"

using namespace ffasm;

namespace {

ScenarioConfig small_factor(int n, int G, int K, std::uint64_t seed, int rep = 0) {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::factor;
  cfg.n = n;
  cfg.n_covariates = G;
  cfg.K = K;
  cfg.m = 4;
  cfg.seed = seed;
  cfg.rep = rep;
  return cfg;
}

ScenarioConfig small_corr(int n, int G, double rho, std::uint64_t seed, int rep = 0) {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::equal_corr;
  cfg.n = n;
  cfg.n_covariates = G;
  cfg.rho = rho;
  cfg.m = 4;
  cfg.seed = seed;
  cfg.rep = rep;
  return cfg;
}

FfasmConfig base_config(FfasmPath path, int m = 4) {
  FfasmConfig cfg;
  cfg.truncation = Truncation::fixed(m);
  cfg.fixed_K = 2;
  cfg.path = path;
  return cfg;
}

bool block_nonzero(const Eigen::VectorXd& H, int g, int m) {
  return H.segment(g * m, m).cwiseAbs().maxCoeff() > 0.0;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("build_scores centers, runs FPCA per covariate, and stacks blocks") {
  SimulatedData d = generate(small_factor(30, 3, 2, 51));
  ScoreBundle bundle = build_scores(d.sample, Truncation::fixed(4));
  REQUIRE(bundle.eigensystems.size() == 3);
  REQUIRE(bundle.mean_curves.size() == 3);
  CHECK(bundle.scores.n() == 30);
  CHECK(bundle.scores.p() == 12);
  CHECK(bundle.scores.centered);
  CHECK(bundle.scores.data.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
  for (int g = 0; g < 3; ++g) {
    CHECK(bundle.eigensystems[g].covariate == g);
    CHECK(bundle.eigensystems[g].m == 4);
    CHECK(bundle.scores.blocks[g].offset == 4 * g);
  }
}

TEST_CASE("reconstruct_beta maps score coefficients through the eigenfunctions") {
  Grid grid = Grid::uniform(0.0, 1.0, 21);
  Eigen::MatrixXd Phi = fourier_basis(2, grid);
  EigenSystem es0, es1;
  es0.covariate = 0;
  es0.functions = Phi;
  es0.m = 2;
  es1.covariate = 1;
  es1.functions = Phi;
  es1.m = 2;
  Eigen::VectorXd H(4);
  H << 2.0, -1.0, 0.0, 0.0;
  auto curves = reconstruct_beta(H, {es0, es1});
  REQUIRE(curves.size() == 2);
  CHECK((curves[0] - (2.0 * Phi.col(0) - Phi.col(1))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(curves[1].cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(reconstruct_beta(wrong, {es0, es1}), ShapeMismatch);
}

TEST_CASE("fitting runs end to end with coherent selection on both paths") {
  SimulatedData d = generate(small_factor(80, 6, 2, 52));
  for (FfasmPath path : {FfasmPath::projection_linear, FfasmPath::glm_augmented}) {
    FfasmConfig cfg = base_config(path);
    FfasmFit fit = fit_ffasm(d.sample, d.responses, cfg);
    CHECK(fit.K == 2);
    CHECK(fit.H.size() == 24);
    CHECK(fit.beta_curves.size() == 6);
    CHECK(fit.m_per_covariate == std::vector<int>(6, 4));
    CHECK(fit.lambda == doctest::Approx(fit.cv.lambda));
    CHECK(fit.cv.lambdas.size() == 50);
    CHECK(fit.path == path);
    CHECK(fit.mu_y == doctest::Approx(d.responses.mean()));
    // selection coherence: selected <=> nonzero block <=> nonzero curve
    for (int g = 0; g < 6; ++g) {
      const bool in_sel =
          std::find(fit.selected.begin(), fit.selected.end(), g) != fit.selected.end();
      CHECK(in_sel == block_nonzero(fit.H, g, 4));
      CHECK(in_sel == (fit.beta_curves[g].cwiseAbs().maxCoeff() > 0.0));
    }
    if (path == FfasmPath::projection_linear) {
      CHECK(fit.beta0 == 0.0);
      CHECK(fit.gamma.size() == 0);
      CHECK(fit.base == doctest::Approx(fit.mu_y));
    } else {
      CHECK(fit.gamma.size() == 2);
    }
  }
}

TEST_CASE("factor count is selected by the ratio criterion when not fixed") {
  SimulatedData d = generate(small_factor(120, 8, 2, 53));
  FfasmConfig cfg = base_config(FfasmPath::projection_linear);
  cfg.fixed_K = 0;
  FfasmFit fit = fit_ffasm(d.sample, d.responses, cfg);
  CHECK(fit.K == 2);
}

TEST_CASE("projection-path fit is invariant to shifts inside the factor span") {
  SimulatedData d = generate(small_factor(60, 5, 2, 54));
  FfasmConfig cfg = base_config(FfasmPath::projection_linear);
  cfg.fixed_lambda = 0.05;
  FfasmFit a = fit_ffasm(d.sample, d.responses, cfg);
  Rng rng(55);
  Eigen::VectorXd shift = a.factors.F * rng.normal_vector(2);
  FfasmFit b = fit_ffasm(d.sample, d.responses + shift, cfg);
  CHECK((a.H - b.H).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pure-noise responses select the empty model in most replications") {
  // Null signal: curves carry a factor structure but y is independent noise
  // with variance 0.1. The single-split tuner trains on floor(n/3) rows and is
  // conservative, so it almost always returns the empty model; the k-fold
  // default trades some of that null specificity for power and stays empty in
  // most replications (measured ~70% across seeds).
  int empty_kfold = 0, empty_holdout = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    ScenarioConfig scfg;
    scfg.scenario = Scenario::factor;
    scfg.n = 100;
    scfg.n_covariates = 10;
    scfg.K = 2;
    scfg.m = 10;
    scfg.seed = 60;
    scfg.rep = r;
    SimulatedData d = generate(scfg);
    Rng rng(derive_seed(67, static_cast<std::uint64_t>(r)));
    Eigen::VectorXd y = std::sqrt(0.1) * rng.normal_vector(100);
    FfasmConfig cfg = base_config(FfasmPath::projection_linear, 10);
    cfg.seed = static_cast<std::uint64_t>(100 + r);
    FfasmFit kf = fit_ffasm(d.sample, y, cfg);
    if (kf.selected.empty()) ++empty_kfold;
    cfg.cv = CvScheme::holdout_third();
    FfasmFit ho = fit_ffasm(d.sample, y, cfg);
    if (ho.selected.empty()) ++empty_holdout;
  }
  CHECK(empty_kfold >= 13);
  CHECK(empty_holdout >= 16);
}

TEST_CASE("a single strong covariate is recovered nearly exactly") {
  int exact = 0, glm_exact = 0;
  const int runs = 10;
  for (int r = 0; r < runs; ++r) {
    ScenarioConfig scfg = small_corr(100, 8, 0.0, 70, r);
    scfg.noise_sd_curve = 0.0;
    SimulatedData d = generate(scfg);
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(8, 4);
    coeffs.row(0) << 3.0, 2.0, 1.0, 0.5;
    Rng rng(derive_seed(71, static_cast<std::uint64_t>(r)));
    Eigen::VectorXd y = gen_response_scores(d.truth.scores, coeffs, 0.3, rng);

    FfasmConfig cfg = base_config(FfasmPath::projection_linear);
    cfg.seed = static_cast<std::uint64_t>(700 + r);
    FfasmFit fit = fit_ffasm(d.sample, y, cfg);
    const bool has0 =
        std::find(fit.selected.begin(), fit.selected.end(), 0) != fit.selected.end();
    if (has0 && fit.selected.size() <= 3) ++exact;

    FfasmConfig gcfg = base_config(FfasmPath::glm_augmented);
    gcfg.seed = cfg.seed;
    FfasmFit gfit = fit_ffasm(d.sample, y, gcfg);
    const bool ghas0 =
        std::find(gfit.selected.begin(), gfit.selected.end(), 0) != gfit.selected.end();
    if (ghas0 && gfit.selected.size() <= 3) ++glm_exact;
  }
  CHECK(exact >= 8);
  CHECK(glm_exact >= 8);
}

TEST_CASE("prediction applies base level, mean centering, and quadrature") {
  Grid grid = Grid::uniform(0.0, 1.0, 51);
  FfasmFit fit;
  fit.grid = grid;
  fit.base = 1.0;
  fit.family = Family::gaussian;
  fit.beta_curves = {Eigen::VectorXd::Ones(51)};
  fit.mean_curves = {Eigen::VectorXd::Zero(51)};

  FunctionalSample s;
  s.grid = grid;
  s.curves.push_back(Eigen::MatrixXd::Constant(2, 51, 2.0));
  s.curves[0].row(1).setConstant(-1.0);

  Eigen::VectorXd pred = predict(fit, s);
  REQUIRE(pred.size() == 2);
  CHECK(pred[0] == doctest::Approx(3.0).epsilon(1e-12));   // 1 + integral(2 * 1)
  CHECK(pred[1] == doctest::Approx(0.0).epsilon(1e-12));

  fit.mean_curves = {Eigen::VectorXd::Ones(51)};
  CHECK(predict(fit, s)[0] == doctest::Approx(2.0).epsilon(1e-12));  // 1 + integral(1)

  fit.family = Family::logistic;
  const double p0 = predict(fit, s)[0];
  CHECK(p0 == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));

  FunctionalSample two_cov = s;
  two_cov.curves.push_back(s.curves[0]);
  CHECK_THROWS_AS(predict(fit, two_cov), GridMismatch);
  FunctionalSample other_grid;
  other_grid.grid = Grid::uniform(0.0, 1.0, 21);
  other_grid.curves.push_back(Eigen::MatrixXd::Zero(2, 21));
  CHECK_THROWS_AS(predict(fit, other_grid), GridMismatch);
}

TEST_CASE("in-sample predictions track a strong linear signal") {
  // sparse truth: covariates 6..9 carry no signal, which pins the
  // score-space coefficients despite the rank deficit left by the factors
  ScenarioConfig scfg = small_factor(100, 10, 2, 80);
  scfg.noise_sd_response = 0.05;
  SimulatedData d = generate(scfg);
  FfasmConfig cfg = base_config(FfasmPath::glm_augmented);
  FfasmFit fit = fit_ffasm(d.sample, d.responses, cfg);
  Eigen::VectorXd yhat = predict(fit, d.sample);
  const double cor =
      ((yhat.array() - yhat.mean()) * (d.responses.array() - d.responses.mean())).sum() /
      (std::sqrt((yhat.array() - yhat.mean()).square().sum()) *
       std::sqrt((d.responses.array() - d.responses.mean()).square().sum()));
  CHECK(cor > 0.8);
}

TEST_CASE("out-of-sample R^2 is positive on correlated designs") {
  double total = 0.0;
  int counted = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    ScenarioConfig scfg;
    scfg.scenario = Scenario::equal_corr;
    scfg.n = 150;
    scfg.n_covariates = 20;
    scfg.rho = 0.5;
    scfg.m = 10;
    scfg.seed = 90;
    scfg.rep = r;
    SimulatedData d = generate(scfg);

    FunctionalSample train, test;
    train.grid = test.grid = d.sample.grid;
    for (const auto& c : d.sample.curves) {
      train.curves.push_back(c.topRows(100));
      test.curves.push_back(c.bottomRows(50));
    }
    Eigen::VectorXd y_train = d.responses.head(100), y_test = d.responses.tail(50);

    FfasmConfig cfg;
    cfg.truncation = Truncation::fixed(10);
    cfg.path = FfasmPath::glm_augmented;
    cfg.seed = static_cast<std::uint64_t>(900 + r);
    FfasmFit fit = fit_ffasm(train, y_train, cfg);
    auto r2 = out_of_sample_r2(y_test, predict(fit, test), y_train.mean());
    if (r2) {
      total += *r2;
      ++counted;
    }
  }
  REQUIRE(counted == runs);
  CHECK(total / counted > 0.0);
}

TEST_CASE("selection threshold zeroes weak blocks coherently") {
  SimulatedData d = generate(small_factor(60, 5, 2, 81));
  FfasmConfig cfg = base_config(FfasmPath::projection_linear);
  cfg.selection_threshold = 1e9;
  FfasmFit fit = fit_ffasm(d.sample, d.responses, cfg);
  CHECK(fit.selected.empty());
  CHECK(fit.H.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& b : fit.beta_curves) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("configuration validation") {
  FfasmConfig cfg;
  cfg.n_lambda = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = FfasmConfig{};
  cfg.lambda_ratio = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = FfasmConfig{};
  cfg.selection_threshold = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = FfasmConfig{};
  cfg.family = Family::logistic;
  cfg.path = FfasmPath::projection_linear;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = FfasmConfig{};
  cfg.fixed_lambda = -0.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("both paths handle more score columns than subjects") {
  SimulatedData d = generate(small_factor(30, 10, 2, 82));  // p = 40 > n = 30
  FfasmConfig cfg = base_config(FfasmPath::projection_linear);
  FfasmFit proj = fit_ffasm(d.sample, d.responses, cfg);
  CHECK(proj.H.size() == 40);
  CHECK(proj.H.allFinite());
  FfasmConfig ok = base_config(FfasmPath::glm_augmented);
  FfasmFit glm = fit_ffasm(d.sample, d.responses, ok);
  CHECK(glm.H.size() == 40);
  CHECK(glm.H.allFinite());
}

TEST_CASE("logistic responses fit on the augmented path with probability outputs") {
  ScenarioConfig scfg = small_factor(120, 10, 2, 83);
  SimulatedData d = generate(scfg);
  Rng rng(84);
  Eigen::VectorXd y(120);
  Eigen::VectorXd eta = (d.responses.array() - d.responses.mean()) / 4.0;
  for (int i = 0; i < 120; ++i)
    y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta[i])) ? 1.0 : 0.0;

  FfasmConfig cfg = base_config(FfasmPath::glm_augmented);
  cfg.family = Family::logistic;
  FfasmFit fit = fit_ffasm(d.sample, y, cfg);
  CHECK(fit.family == Family::logistic);
  Eigen::VectorXd prob = predict(fit, d.sample);
  CHECK((prob.array() > 0.0).all());
  CHECK((prob.array() < 1.0).all());
}

TEST_CASE("fixed lambda skips cross-validation") {
  SimulatedData d = generate(small_factor(50, 4, 2, 85));
  FfasmConfig cfg = base_config(FfasmPath::projection_linear);
  cfg.fixed_lambda = 0.2;
  FfasmFit fit = fit_ffasm(d.sample, d.responses, cfg);
  CHECK(fit.lambda == doctest::Approx(0.2));
  CHECK(fit.cv.lambdas.size() == 0);
}

}  // TEST_SUITE
