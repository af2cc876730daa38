#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "ffasm/errors.hpp"
#include "ffasm/penalized.hpp"
#include "ffasm/rng.hpp"

using namespace ffasm;

namespace {

double coord_obj(const PenaltySpec& spec, double z, double step, double t) {
  return (t - z) * (t - z) / (2.0 * step) + penalty_value(spec, t);
}

Eigen::MatrixXd unit_rms_design(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X = rng.normal_matrix(n, d);
  for (int j = 0; j < d; ++j) {
    const double rms = std::sqrt(X.col(j).squaredNorm() / n);
    X.col(j) /= rms;
  }
  return X;
}

Design all_penalized(Eigen::MatrixXd X) {
  const std::size_t d = static_cast<std::size_t>(X.cols());
  return Design{std::move(X), std::vector<bool>(d, true), -1};
}

double objective_recompute(const Eigen::VectorXd& y, const Design& design,
                           const PenaltySpec& spec, const Eigen::VectorXd& theta) {
  double obj = glm_loss(Family::gaussian, y, design.X, theta).first;
  for (int j = 0; j < design.X.cols(); ++j)
    if (design.penalize[static_cast<std::size_t>(j)]) obj += penalty_value(spec, theta[j]);
  return obj;
}

std::vector<int> support_of(const Eigen::VectorXd& theta) {
  std::vector<int> s;
  for (int j = 0; j < theta.size(); ++j)
    if (theta[j] != 0.0) s.push_back(j);
  return s;
}

}  // namespace

TEST_SUITE("penalized") {

TEST_CASE("penalty values at hand-computed points") {
  PenaltySpec mcp = PenaltySpec::mcp(1.0, 3.0);
  CHECK(penalty_value(mcp, 5.0) == doctest::Approx(1.5).epsilon(1e-12));   // plateau g l^2/2
  CHECK(penalty_value(mcp, 1.0) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(penalty_value(mcp, 0.0) == doctest::Approx(0.0));
  CHECK(penalty_value(mcp, -5.0) == penalty_value(mcp, 5.0));

  PenaltySpec las = PenaltySpec::lasso(2.0);
  CHECK(penalty_value(las, -3.0) == doctest::Approx(6.0).epsilon(1e-12));

  PenaltySpec scad = PenaltySpec::scad(1.0, 3.7);
  CHECK(penalty_value(scad, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(penalty_value(scad, 2.0) == doctest::Approx(9.8 / 5.4).epsilon(1e-12));
  CHECK(penalty_value(scad, 5.0) == doctest::Approx(2.35).epsilon(1e-12));
}

TEST_CASE("prox closed forms at hand-computed points") {
  PenaltySpec mcp = PenaltySpec::mcp(1.0, 3.0);
  CHECK(prox(mcp, 1.5, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(prox(mcp, 4.0, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(prox(mcp, 0.5, 1.0) == doctest::Approx(0.0));
  CHECK(prox(mcp, -1.5, 1.0) == doctest::Approx(-0.75).epsilon(1e-12));

  PenaltySpec las = PenaltySpec::lasso(1.0);
  CHECK(prox(las, 3.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(prox(las, -0.5, 1.0) == doctest::Approx(0.0));
  CHECK(prox(las, 3.0, 0.5) == doctest::Approx(2.5).epsilon(1e-12));

  PenaltySpec scad = PenaltySpec::scad(1.0, 3.7);
  CHECK(prox(scad, 1.5, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(prox(scad, 3.0, 1.0) == doctest::Approx(4.4 / 1.7).epsilon(1e-12));
  CHECK(prox(scad, 5.0, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("prox agrees with brute-force minimization on 1000 random cases") {
  Rng rng(4001);
  int argmin_mismatch = 0;
  for (int c = 0; c < 1000; ++c) {
    PenaltySpec spec;
    const int kind = c % 3;
    const double lambda = 0.1 + 1.9 * rng.uniform();
    if (kind == 0) spec = PenaltySpec::lasso(lambda);
    if (kind == 1) spec = PenaltySpec::mcp(lambda, 1.5 + 2.5 * rng.uniform());
    if (kind == 2) spec = PenaltySpec::scad(lambda, 2.2 + 2.3 * rng.uniform());
    const double z = -5.0 + 10.0 * rng.uniform();
    const double step = 0.2 + 1.8 * rng.uniform();

    const double t_hat = prox(spec, z, step);
    // the minimizer lies between 0 and z for all three penalties
    const double lo = std::min(0.0, z) - 0.01;
    const double hi = std::max(0.0, z) + 0.01;
    double best_t = lo, best_obj = coord_obj(spec, z, step, lo);
    for (double t = lo; t <= hi; t += 1e-4) {
      const double o = coord_obj(spec, z, step, t);
      if (o < best_obj) {
        best_obj = o;
        best_t = t;
      }
    }
    const double obj_hat = coord_obj(spec, z, step, t_hat);
    CHECK(obj_hat <= best_obj + 1e-9);
    CHECK(std::abs(obj_hat - best_obj) <= 5e-4);
    if (std::abs(t_hat - best_t) > 2e-4) ++argmin_mismatch;
  }
  // mismatches can only come from near-ties between two global minimizers
  CHECK(argmin_mismatch <= 5);
}

TEST_CASE("penalty spec validation") {
  CHECK_THROWS_AS(PenaltySpec::mcp(-1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(PenaltySpec::mcp(1.0, 1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(PenaltySpec::scad(1.0, 2.0).validate(), InvalidArgument);
  CHECK_NOTHROW(PenaltySpec::scad(1.0).validate());
  CHECK_THROWS_AS(prox(PenaltySpec::lasso(1.0), 1.0, 0.0), InvalidArgument);
  CHECK(PenaltySpec::mcp(0.5).with_lambda(0.9).lambda == doctest::Approx(0.9));
}

TEST_CASE("glm_loss at hand-computed points") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0.5, 1, -0.5, 1, 1.0, 1, 0.0;
  Eigen::VectorXd y(4);
  y << 1, 0, 1, 0;

  // logistic at theta = 0: value log 2, gradient X^T (1/2 - y) / n
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(2);
  auto [v, g] = glm_loss(Family::logistic, y, X, theta0);
  CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  Eigen::VectorXd expect = X.transpose() * (Eigen::VectorXd::Constant(4, 0.5) - y) / 4.0;
  CHECK((g - expect).cwiseAbs().maxCoeff() < 1e-12);

  // gaussian: value (1/n) sum(-y eta + eta^2/2)
  Eigen::VectorXd th(2);
  th << 0.3, -0.2;
  Eigen::VectorXd eta = X * th;
  auto [gv, gg] = glm_loss(Family::gaussian, y, X, th);
  CHECK(gv == doctest::Approx((-y.dot(eta) + 0.5 * eta.squaredNorm()) / 4.0).epsilon(1e-12));
  CHECK((gg - X.transpose() * (eta - y) / 4.0).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXd bad(4);
  bad << 1, 0, 2, 0;
  CHECK_THROWS_AS(glm_loss(Family::logistic, bad, X, theta0), InvalidResponse);
  Eigen::VectorXd shortth(1);
  shortth << 1.0;
  CHECK_THROWS_AS(glm_loss(Family::gaussian, y, X, shortth), ShapeMismatch);
}

TEST_CASE("glm_loss gradient matches central finite differences") {
  Rng rng(4002);
  Eigen::MatrixXd X = rng.normal_matrix(20, 6);
  Eigen::VectorXd theta = 0.5 * rng.normal_vector(6);
  const double h = 1e-6;
  for (Family fam : {Family::gaussian, Family::logistic}) {
    Eigen::VectorXd y(20);
    if (fam == Family::gaussian) {
      y = X * theta + rng.normal_vector(20);
    } else {
      for (int i = 0; i < 20; ++i) y[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    Eigen::VectorXd g = glm_loss(fam, y, X, theta).second;
    for (int j = 0; j < 6; ++j) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double fd =
          (glm_loss(fam, y, X, tp).first - glm_loss(fam, y, X, tm).first) / (2 * h);
      CHECK(std::abs(g[j] - fd) <= 1e-5 * (1.0 + std::abs(g[j])));
    }
  }
}

TEST_CASE("lambda = 0 reproduces least squares") {
  Rng rng(4003);
  Eigen::MatrixXd X = rng.normal_matrix(50, 4);
  Eigen::VectorXd theta_star(4);
  theta_star << 1.0, -2.0, 0.5, 3.0;
  Eigen::VectorXd y = X * theta_star + 0.3 * rng.normal_vector(50);
  Eigen::VectorXd ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);

  for (bool standardize : {true, false}) {
    FitOptions opts;
    opts.standardize = standardize;
    FitResult fr = fit_penalized(y, all_penalized(X), Family::gaussian,
                                 PenaltySpec::mcp(0.0), opts);
    CHECK(fr.converged);
    CHECK((fr.theta - ols).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("orthonormal-design lasso matches soft thresholding") {
  Rng rng(4004);
  const int n = 40, d = 5;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng.normal_matrix(n, d));
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  Eigen::MatrixXd X = std::sqrt(static_cast<double>(n)) * Q;  // X^T X / n = I
  Eigen::VectorXd theta_star(d);
  theta_star << 2.0, -1.0, 0.0, 0.5, 0.0;
  Eigen::VectorXd y = X * theta_star + 0.2 * rng.normal_vector(n);

  const double lambda = 0.3;
  FitResult fr = fit_penalized(y, all_penalized(X), Family::gaussian,
                               PenaltySpec::lasso(lambda));
  Eigen::VectorXd z = X.transpose() * y / n;
  for (int j = 0; j < d; ++j) {
    const double soft = std::copysign(std::max(std::abs(z[j]) - lambda, 0.0), z[j]);
    CHECK(fr.theta[j] == doctest::Approx(soft).epsilon(1e-8));
  }
}

TEST_CASE("mcp solution matches exhaustive support enumeration") {
  const int n = 20, d = 5;
  Eigen::MatrixXd X = unit_rms_design(n, d, 4005);
  Rng rng(4006);
  Eigen::VectorXd theta_star(d);
  theta_star << 2.0, -1.5, 0.0, 0.0, 1.0;
  Eigen::VectorXd y = X * theta_star + 0.5 * rng.normal_vector(n);
  PenaltySpec spec = PenaltySpec::mcp(0.35, 3.0);

  FitOptions opts;
  opts.standardize = false;
  opts.tol = 1e-10;
  Design design = all_penalized(X);
  FitResult fr = fit_penalized(y, design, Family::gaussian, spec, opts);
  const double solver_obj = objective_recompute(y, design, spec, fr.theta);
  CHECK(std::abs(fr.objective - solver_obj) < 1e-10);

  // oracle: enumerate all 2^5 supports, minimize the penalized objective
  // restricted to each support by exact coordinate minimization from the
  // restricted least-squares start, take the overall minimum
  double oracle = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < 32; ++mask) {
    std::vector<int> S;
    for (int j = 0; j < d; ++j)
      if (mask & (1 << j)) S.push_back(j);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    if (!S.empty()) {
      Eigen::MatrixXd Xs(n, static_cast<int>(S.size()));
      for (std::size_t k = 0; k < S.size(); ++k) Xs.col(static_cast<int>(k)) = X.col(S[k]);
      Eigen::VectorXd ols = (Xs.transpose() * Xs)
                                .ldlt()
                                .solve(Xs.transpose() * y);
      for (std::size_t k = 0; k < S.size(); ++k) theta[S[k]] = ols[static_cast<int>(k)];
      Eigen::VectorXd r = y - X * theta;
      for (int sweep = 0; sweep < 500; ++sweep) {
        double delta = 0.0;
        for (int j : S) {
          const double v = X.col(j).squaredNorm() / n;
          const double z = X.col(j).dot(r) / n + v * theta[j];
          const double t = prox(spec, z / v, 1.0 / v);
          if (t != theta[j]) {
            r += X.col(j) * (theta[j] - t);
            delta = std::max(delta, std::abs(t - theta[j]));
            theta[j] = t;
          }
        }
        if (delta < 1e-12) break;
      }
    }
    oracle = std::min(oracle, objective_recompute(y, design, spec, theta));
  }
  CHECK(solver_obj <= oracle + 1e-6);
  CHECK(std::abs(solver_obj - oracle) <= 1e-4);
}

TEST_CASE("objective is monotone over sweeps") {
  Rng rng(4007);
  const int n = 40, d = 8;
  Eigen::MatrixXd X = rng.normal_matrix(n, d);
  Eigen::VectorXd y = X.col(0) - 0.5 * X.col(3) + 0.3 * rng.normal_vector(n);
  Eigen::VectorXd ybin(n);
  for (int i = 0; i < n; ++i) ybin[i] = y[i] > 0 ? 1.0 : 0.0;

  for (Family fam : {Family::gaussian, Family::logistic}) {
    const Eigen::VectorXd& resp = fam == Family::gaussian ? y : ybin;
    double prev = std::numeric_limits<double>::infinity();
    for (int sweeps = 1; sweeps <= 6; ++sweeps) {
      FitOptions opts;
      opts.max_iter = sweeps;
      opts.tol = 0.0;
      FitResult fr = fit_penalized(resp, all_penalized(X), fam,
                                   PenaltySpec::mcp(0.1, 3.0), opts);
      CHECK(fr.objective <= prev + 1e-12);
      prev = fr.objective;
    }
  }
}

TEST_CASE("KKT certificate holds at the returned solution") {
  Rng rng(4008);
  const int n = 60, d = 10;
  Eigen::MatrixXd X = rng.normal_matrix(n, d);
  Eigen::VectorXd theta_star = Eigen::VectorXd::Zero(d);
  theta_star[0] = 2.0;
  theta_star[4] = -1.0;
  Eigen::VectorXd y = X * theta_star + 0.4 * rng.normal_vector(n);

  // hand-checked lasso stationarity on the raw scale
  const double lambda = 0.15;
  FitOptions raw;
  raw.standardize = false;
  Design design = all_penalized(X);
  FitResult fr = fit_penalized(y, design, Family::gaussian, PenaltySpec::lasso(lambda), raw);
  Eigen::VectorXd grad = glm_loss(Family::gaussian, y, X, fr.theta).second;
  for (int j = 0; j < d; ++j) {
    if (fr.theta[j] != 0.0)
      CHECK(std::abs(grad[j] + lambda * (fr.theta[j] > 0 ? 1.0 : -1.0)) <= 1e-6);
    else
      CHECK(std::abs(grad[j]) <= lambda + 1e-6);
  }
  CHECK(kkt_max_violation(y, design, Family::gaussian, PenaltySpec::lasso(lambda), fr.theta,
                          raw) <= 1e-6);

  // mcp with internal standardization
  FitResult fm = fit_penalized(y, design, Family::gaussian, PenaltySpec::mcp(0.2, 3.0));
  CHECK(kkt_max_violation(y, design, Family::gaussian, PenaltySpec::mcp(0.2, 3.0), fm.theta) <=
        1e-6);

  // logistic at a tight tolerance
  Eigen::VectorXd ybin(n);
  for (int i = 0; i < n; ++i) ybin[i] = (X * theta_star)[i] + rng.normal() > 0 ? 1.0 : 0.0;
  FitOptions tight;
  tight.tol = 1e-9;
  FitResult fl =
      fit_penalized(ybin, design, Family::logistic, PenaltySpec::lasso(0.05), tight);
  CHECK(kkt_max_violation(ybin, design, Family::logistic, PenaltySpec::lasso(0.05), fl.theta,
                          tight) <= 1e-6);
}

TEST_CASE("standardization is a no-op on unit-RMS columns") {
  Eigen::MatrixXd X = unit_rms_design(50, 6, 4009);
  Rng rng(4010);
  Eigen::VectorXd y = X.col(1) - X.col(2) + 0.3 * rng.normal_vector(50);
  FitOptions raw;
  raw.standardize = false;
  FitResult a = fit_penalized(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.2));
  FitResult b =
      fit_penalized(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.2), raw);
  CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("warm starts converge immediately at the solution") {
  Rng rng(4011);
  Eigen::MatrixXd X = rng.normal_matrix(40, 5);
  Eigen::VectorXd y = X.col(0) + 0.2 * rng.normal_vector(40);
  FitResult fr = fit_penalized(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.1));
  FitOptions opts;
  opts.init = fr.theta;
  FitResult again =
      fit_penalized(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.1), opts);
  CHECK(again.converged);
  CHECK(again.iterations <= 2);
  CHECK((again.theta - fr.theta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lambda path: head kills all penalized coefficients, grid is geometric") {
  Rng rng(4012);
  const int n = 50, d = 8;
  Eigen::MatrixXd X = rng.normal_matrix(n, d);
  Eigen::VectorXd y = 2.0 * X.col(0) - X.col(5) + 0.5 * rng.normal_vector(n);

  // with an unpenalized intercept
  Eigen::MatrixXd Xi(n, d + 1);
  Xi.col(0).setOnes();
  Xi.rightCols(d) = X;
  std::vector<bool> mask(static_cast<std::size_t>(d + 1), true);
  mask[0] = false;
  Design design{Xi, mask, 0};

  PathResult path = lambda_path(y, design, Family::gaussian, PenaltySpec::lasso(0.0), 30, 1e-3);
  REQUIRE(path.lambdas.size() == 30);
  REQUIRE(path.fits.size() == 30);
  for (int k = 1; k < 30; ++k) CHECK(path.lambdas[k] < path.lambdas[k - 1]);
  CHECK(path.lambdas[29] == doctest::Approx(path.lambdas[0] * 1e-3).epsilon(1e-9));
  // at lambda_max every penalized coefficient is exactly zero
  CHECK(path.fits[0].theta.tail(d).cwiseAbs().maxCoeff() == 0.0);
  CHECK(path.fits[0].theta[0] == doctest::Approx(y.mean()).epsilon(1e-8));
  // the tail fit has active coefficients
  CHECK(support_of(path.fits[29].theta).size() >= 2);

  // a path of length 1 is a single fit at lambda_max
  PathResult single =
      lambda_path(y, design, Family::gaussian, PenaltySpec::lasso(0.0), 1, 1e-3);
  REQUIRE(single.fits.size() == 1);
  FitResult direct = fit_penalized(y, design, Family::gaussian,
                                   PenaltySpec::lasso(single.lambdas[0]));
  CHECK((single.fits[0].theta - direct.theta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("active sets grow down the path in at least 95 percent of steps") {
  Rng rng(4013);
  const int n = 80, d = 20;
  Eigen::MatrixXd Z = rng.normal_matrix(n, d);
  Eigen::MatrixXd X = Z;
  for (int j = 1; j < d; ++j) X.col(j) = 0.5 * X.col(j - 1) + Z.col(j);  // correlated design
  Eigen::VectorXd theta_star = Eigen::VectorXd::Zero(d);
  theta_star[2] = 1.5;
  theta_star[7] = -1.0;
  theta_star[11] = 0.8;
  Eigen::VectorXd y = X * theta_star + 0.5 * rng.normal_vector(n);

  PathResult path =
      lambda_path(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.0), 50, 1e-3);
  int grew = 0;
  for (int k = 1; k < 50; ++k) {
    if (support_of(path.fits[k].theta).size() >= support_of(path.fits[k - 1].theta).size())
      ++grew;
  }
  CHECK(grew >= 47);  // 95% of 49 steps
}

TEST_CASE("cv_splits produce valid deterministic partitions") {
  auto folds = cv_splits(60, CvScheme::kfold(5), 99);
  REQUIRE(folds.size() == 5);
  std::set<int> seen;
  for (const auto& [train, test] : folds) {
    CHECK(train.size() == 48);
    CHECK(test.size() == 12);
    CHECK(std::is_sorted(train.begin(), train.end()));
    CHECK(std::is_sorted(test.begin(), test.end()));
    std::set<int> tr(train.begin(), train.end());
    for (int i : test) CHECK(tr.count(i) == 0);
    seen.insert(test.begin(), test.end());
  }
  CHECK(seen.size() == 60);

  auto hold = cv_splits(60, CvScheme::holdout_third(), 99);
  REQUIRE(hold.size() == 1);
  CHECK(hold[0].first.size() == 20);
  CHECK(hold[0].second.size() == 40);

  auto again = cv_splits(60, CvScheme::kfold(5), 99);
  CHECK(folds == again);
  CHECK_THROWS_AS(cv_splits(10, CvScheme::kfold(4), 1), InvalidArgument);
  CHECK_THROWS_AS(cv_splits(2, CvScheme::holdout_third(), 1), InvalidArgument);
}

TEST_CASE("cross-validation is deterministic and ties go to the larger lambda") {
  Rng rng(4014);
  Eigen::MatrixXd X = rng.normal_matrix(30, 4);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(30);
  CvChoice c = cross_validate(zero, all_penalized(X), Family::gaussian,
                              PenaltySpec::mcp(0.0), CvScheme::holdout_third(), 7);
  // a zero response gives identical error at every lambda: keep the largest
  CHECK(c.index == 0);
  CHECK(c.lambda == c.lambdas[0]);

  Eigen::VectorXd y = X.col(0) + 0.3 * rng.normal_vector(30);
  CvChoice a = cross_validate(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.0),
                              CvScheme::kfold(5), 11);
  CvChoice b = cross_validate(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.0),
                              CvScheme::kfold(5), 11);
  CHECK(a.index == b.index);
  CHECK((a.errors - b.errors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cross-validation keeps pure noise empty and strong signals active") {
  int noise_empty = 0, signal_kept = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    Rng rng(5000 + static_cast<std::uint64_t>(r));
    const int n = 60, d = 10;
    Eigen::MatrixXd X = rng.normal_matrix(n, d);

    Eigen::VectorXd noise = rng.normal_vector(n);
    CvChoice cn = cross_validate(noise, all_penalized(X), Family::gaussian,
                                 PenaltySpec::mcp(0.0), CvScheme::holdout_third(),
                                 200 + static_cast<std::uint64_t>(r));
    FitResult fn = fit_penalized(noise, all_penalized(X), Family::gaussian,
                                 PenaltySpec::mcp(cn.lambda));
    if (support_of(fn.theta).empty()) ++noise_empty;

    Eigen::VectorXd theta_star = Eigen::VectorXd::Zero(d);
    theta_star[0] = 3.0;
    theta_star[1] = -2.0;
    theta_star[2] = 1.5;
    Eigen::VectorXd y = X * theta_star + 0.3 * rng.normal_vector(n);
    CvChoice cs = cross_validate(y, all_penalized(X), Family::gaussian, PenaltySpec::mcp(0.0),
                                 CvScheme::kfold(5), 300 + static_cast<std::uint64_t>(r));
    FitResult fs = fit_penalized(y, all_penalized(X), Family::gaussian,
                                 PenaltySpec::mcp(cs.lambda));
    auto s = support_of(fs.theta);
    const std::vector<int> want = {0, 1, 2};
    if (std::includes(s.begin(), s.end(), want.begin(), want.end())) ++signal_kept;
  }
  CHECK(noise_empty >= static_cast<int>(0.8 * runs));
  CHECK(signal_kept >= static_cast<int>(0.95 * runs));
}

TEST_CASE("project_out removes span components and keeps orthogonal ones") {
  Rng rng(4015);
  Eigen::MatrixXd F = rng.normal_matrix(10, 2);
  Eigen::VectorXd inspan = F * Eigen::Vector2d(1.5, -2.0);
  CHECK(project_out(F, inspan).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(10, 1);
  Eigen::VectorXd v = rng.normal_vector(10);
  Eigen::VectorXd centered = project_out(ones, v);
  CHECK((centered - (v.array() - v.mean()).matrix()).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::MatrixXd M = rng.normal_matrix(10, 3);
  Eigen::MatrixXd R = project_out(F, M);
  CHECK((F.transpose() * R).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((project_out(F, R) - R).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("design validation") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 2);
  CHECK_THROWS_AS((Design{X, {true}, -1}.validate()), InvalidArgument);
  Eigen::MatrixXd X2 = X;
  X2(3, 0) = 0.0;
  CHECK_THROWS_AS((Design{X2, {true, true}, 0}.validate()), InvalidArgument);
  CHECK_NOTHROW((Design{X, {true, true}, 0}.validate()));
  Eigen::MatrixXd empty(0, 2);
  CHECK_THROWS_AS((Design{empty, {true, true}, -1}.validate()), InsufficientData);
}

TEST_CASE("logistic fit separates a simple pattern") {
  Rng rng(4016);
  const int n = 200;
  Eigen::MatrixXd X(n, 2);
  X.col(0).setOnes();
  X.col(1) = rng.normal_vector(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double pr = 1.0 / (1.0 + std::exp(-(0.5 + 2.0 * X(i, 1))));
    y[i] = rng.uniform() < pr ? 1.0 : 0.0;
  }
  std::vector<bool> mask = {false, true};
  FitResult fr = fit_penalized(y, Design{X, mask, 0}, Family::logistic,
                               PenaltySpec::lasso(0.01));
  CHECK(fr.converged);
  CHECK(fr.theta[1] > 1.0);  // strong positive slope survives the penalty
  CHECK(fr.theta[1] < 3.5);
}

}  // TEST_SUITE
