#include "ffasm/penalized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ffasm/errors.hpp"
#include "ffasm/linalg.hpp"
#include "ffasm/rng.hpp"

namespace ffasm {

namespace {

double soft(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double log1pexp(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

// Coordinate objective (v/2) t^2 - z t + penalty(t), dropping terms constant
// in t. Used both for closed-form region checks and the nonconvex fallback.
double coord_objective(double t, double z, double v, const PenaltySpec& spec) {
  return 0.5 * v * t * t - z * t + penalty_value(spec, t);
}

// argmin_t (v/2) t^2 - z t + penalty(t) for curvature v > 0. `current` seeds
// the candidate set in the nonconvex regime so sweeps never increase the
// objective.
double coordinate_update(double z, double v, const PenaltySpec& spec, double current) {
  const double lambda = spec.lambda;
  const double gamma = spec.gamma;
  if (lambda <= 0.0) return z / v;
  switch (spec.kind) {
    case PenaltyKind::lasso:
      return soft(z, lambda) / v;
    case PenaltyKind::mcp: {
      if (v * gamma > 1.0) {
        if (std::abs(z) <= lambda) return 0.0;
        if (std::abs(z) <= gamma * lambda * v) return soft(z, lambda) / (v - 1.0 / gamma);
        return z / v;
      }
      break;
    }
    case PenaltyKind::scad: {
      if ((gamma - 1.0) * v > 1.0) {
        const double az = std::abs(z);
        if (az <= lambda) return 0.0;
        if (az <= lambda * (1.0 + v)) return soft(z, lambda) / v;
        if (az <= gamma * lambda * v)
          return ((gamma - 1.0) * z - gamma * lambda * (z > 0 ? 1.0 : -1.0)) /
                 ((gamma - 1.0) * v - 1.0);
        return z / v;
      }
      break;
    }
  }
  // Nonconvex coordinate (curvature too small for the closed form): the
  // objective is piecewise quadratic, so the global minimizer is either a
  // stationary point of one piece or a knot where the penalty changes shape.
  // Compare every such candidate by exact coordinate objective.
  const double sgn = z >= 0.0 ? 1.0 : -1.0;
  double cands[7] = {0.0, z / v, current, sgn * gamma * lambda, 0.0, 0.0, 0.0};
  int m = 4;
  if (spec.kind == PenaltyKind::mcp) {
    if (std::abs(v - 1.0 / gamma) > 1e-12)
      cands[m++] = soft(z, lambda) / (v - 1.0 / gamma);
  } else if (spec.kind == PenaltyKind::scad) {
    cands[m++] = sgn * lambda;
    cands[m++] = soft(z, lambda) / v;
    if (std::abs((gamma - 1.0) * v - 1.0) > 1e-12)
      cands[m++] = ((gamma - 1.0) * z - gamma * lambda * sgn) /
                   ((gamma - 1.0) * v - 1.0);
  }
  double best = cands[0];
  double best_f = coord_objective(best, z, v, spec);
  for (int i = 1; i < m; ++i) {
    const double f = coord_objective(cands[i], z, v, spec);
    if (f < best_f) {
      best_f = f;
      best = cands[i];
    }
  }
  return best;
}

struct Scaled {
  Eigen::MatrixXd X;        // scaled columns
  Eigen::VectorXd scale;    // s_j: theta_internal = theta * s_j
  Eigen::VectorXd colsq_n;  // x_j^T x_j / n of the scaled columns
};

Scaled scale_design(const Design& design, bool standardize) {
  const auto n = static_cast<double>(design.X.rows());
  Scaled s;
  s.X = design.X;
  s.scale = Eigen::VectorXd::Ones(design.X.cols());
  if (standardize) {
    for (Eigen::Index j = 0; j < design.X.cols(); ++j) {
      if (!design.penalize[static_cast<std::size_t>(j)]) continue;
      if (j == design.intercept) continue;
      const double rms = std::sqrt(design.X.col(j).squaredNorm() / n);
      if (rms > 1e-12) {
        s.scale[j] = rms;
        s.X.col(j) /= rms;
      }
    }
  }
  s.colsq_n = s.X.colwise().squaredNorm() / n;
  return s;
}

void check_response(Family family, const Eigen::VectorXd& y) {
  if (family != Family::logistic) return;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0)
      throw InvalidResponse("logistic family requires responses in {0,1}");
  }
}

double penalized_objective(Family family, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& eta, const Eigen::VectorXd& theta_int,
                           const std::vector<bool>& penalize, const PenaltySpec& spec) {
  const auto n = static_cast<double>(y.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double b = family == Family::gaussian ? 0.5 * eta[i] * eta[i] : log1pexp(eta[i]);
    loss += -y[i] * eta[i] + b;
  }
  loss /= n;
  for (Eigen::Index j = 0; j < theta_int.size(); ++j) {
    if (penalize[static_cast<std::size_t>(j)]) loss += penalty_value(spec, theta_int[j]);
  }
  return loss;
}

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd subset_rows(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

// Geometric lambda grid anchored at the null-model gradient.
Eigen::VectorXd make_lambda_grid(const Eigen::VectorXd& y, const Design& design,
                                 Family family, const PenaltySpec& spec_template,
                                 int n_lambda, double ratio, const FitOptions& opts) {
  if (n_lambda < 1) throw InvalidArgument("lambda_path: n_lambda must be >= 1");
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw InvalidArgument("lambda_path: ratio must lie in (0,1]");
  const auto n = static_cast<double>(y.size());

  bool any_unpenalized = false;
  for (bool p : design.penalize) any_unpenalized |= !p;

  Eigen::VectorXd eta0 = Eigen::VectorXd::Zero(y.size());
  if (any_unpenalized) {
    FitOptions null_opts = opts;
    null_opts.init.reset();
    const FitResult null_fit = fit_penalized(
        y, design, family, spec_template.with_lambda(1e30), null_opts);
    eta0 = design.X * null_fit.theta;
  }
  Eigen::VectorXd resid(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = family == Family::gaussian ? eta0[i] : sigmoid(eta0[i]);
    resid[i] = y[i] - mu;
  }

  const Scaled sc = scale_design(design, opts.standardize);
  double lambda_max = 0.0;
  for (Eigen::Index j = 0; j < sc.X.cols(); ++j) {
    if (!design.penalize[static_cast<std::size_t>(j)]) continue;
    lambda_max = std::max(lambda_max, std::abs(sc.X.col(j).dot(resid)) / n);
  }
  lambda_max = std::max(lambda_max, 1e-12);

  Eigen::VectorXd grid(n_lambda);
  if (n_lambda == 1) {
    grid[0] = lambda_max;
  } else {
    const double step = std::log(ratio) / (n_lambda - 1);
    for (int i = 0; i < n_lambda; ++i) grid[i] = lambda_max * std::exp(step * i);
  }
  return grid;
}

}  // namespace

PenaltySpec PenaltySpec::lasso(double lambda) { return {PenaltyKind::lasso, lambda, 0.0}; }
PenaltySpec PenaltySpec::mcp(double lambda, double gamma) {
  return {PenaltyKind::mcp, lambda, gamma};
}
PenaltySpec PenaltySpec::scad(double lambda, double gamma) {
  return {PenaltyKind::scad, lambda, gamma};
}

PenaltySpec PenaltySpec::with_lambda(double l) const {
  PenaltySpec out = *this;
  out.lambda = l;
  return out;
}

void PenaltySpec::validate() const {
  if (lambda < 0.0) throw InvalidArgument("PenaltySpec: lambda must be >= 0");
  if (kind == PenaltyKind::mcp && !(gamma > 1.0))
    throw InvalidArgument("PenaltySpec: mcp needs gamma > 1");
  if (kind == PenaltyKind::scad && !(gamma > 2.0))
    throw InvalidArgument("PenaltySpec: scad needs gamma > 2");
}

double penalty_value(const PenaltySpec& spec, double t) {
  const double a = std::abs(t);
  const double l = spec.lambda;
  const double g = spec.gamma;
  switch (spec.kind) {
    case PenaltyKind::lasso:
      return l * a;
    case PenaltyKind::mcp:
      return a <= g * l ? l * a - t * t / (2.0 * g) : 0.5 * g * l * l;
    case PenaltyKind::scad:
      if (a <= l) return l * a;
      if (a <= g * l) return (2.0 * g * l * a - a * a - l * l) / (2.0 * (g - 1.0));
      return 0.5 * l * l * (g + 1.0);
  }
  return 0.0;
}

double prox(const PenaltySpec& spec, double z, double step) {
  if (!(step > 0.0)) throw InvalidArgument("prox: step must be positive");
  spec.validate();
  // (t - z)^2 / (2 step) expands to the coordinate form with v = 1/step.
  return coordinate_update(z / step, 1.0 / step, spec, z);
}

void Design::validate() const {
  if (penalize.size() != static_cast<std::size_t>(X.cols()))
    throw InvalidArgument("Design: mask length differs from column count");
  if (intercept >= 0) {
    if (intercept >= X.cols()) throw InvalidArgument("Design: intercept index out of range");
    if ((X.col(intercept).array() != 1.0).any())
      throw InvalidArgument("Design: intercept column must be all ones");
  }
  if (X.rows() < 1) throw InsufficientData("Design: empty design");
}

std::pair<double, Eigen::VectorXd> glm_loss(Family family, const Eigen::VectorXd& y,
                                            const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& theta) {
  if (X.rows() != y.size() || X.cols() != theta.size())
    throw ShapeMismatch("glm_loss: shape mismatch");
  check_response(family, y);
  const auto n = static_cast<double>(y.size());
  const Eigen::VectorXd eta = X * theta;
  double value = 0.0;
  Eigen::VectorXd mu(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (family == Family::gaussian) {
      value += -y[i] * eta[i] + 0.5 * eta[i] * eta[i];
      mu[i] = eta[i];
    } else {
      value += -y[i] * eta[i] + log1pexp(eta[i]);
      mu[i] = sigmoid(eta[i]);
    }
  }
  return {value / n, X.transpose() * (mu - y) / n};
}

FitResult fit_penalized(const Eigen::VectorXd& y, const Design& design, Family family,
                        const PenaltySpec& spec, const FitOptions& opts) {
  design.validate();
  spec.validate();
  check_response(family, y);
  if (design.X.rows() != y.size()) throw ShapeMismatch("fit_penalized: y length mismatch");
  const Eigen::Index n = y.size();
  const Eigen::Index d = design.X.cols();
  const auto nd = static_cast<double>(n);

  const Scaled sc = scale_design(design, opts.standardize);
  const PenaltySpec none = spec.with_lambda(0.0);

  // Internal-scale coefficients.
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  if (opts.init) {
    if (opts.init->size() != d) throw ShapeMismatch("fit_penalized: init length mismatch");
    theta = opts.init->cwiseProduct(sc.scale);
  }

  Eigen::VectorXd eta = sc.X * theta;
  Eigen::VectorXd resid;  // gaussian only
  if (family == Family::gaussian) resid = y - eta;

  FitResult out;
  out.lambda = spec.lambda;
  bool converged = false;
  int sweep = 0;
  for (; sweep < opts.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = family == Family::gaussian ? sc.colsq_n[j] : 0.25 * sc.colsq_n[j];
      if (v <= 1e-14) continue;  // information-free column stays put
      double z;
      if (family == Family::gaussian) {
        z = sc.X.col(j).dot(resid) / nd + v * theta[j];
      } else {
        double grad = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          grad += sc.X(i, j) * (sigmoid(eta[i]) - y[i]);
        grad /= nd;
        z = v * theta[j] - grad;
      }
      const bool pen = design.penalize[static_cast<std::size_t>(j)];
      const double updated = coordinate_update(z, v, pen ? spec : none, theta[j]);
      const double delta = updated - theta[j];
      if (delta != 0.0) {
        theta[j] = updated;
        if (family == Family::gaussian)
          resid -= sc.X.col(j) * delta;
        else
          eta += sc.X.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (!std::isfinite(max_change) || !theta.allFinite())
      throw NumericalError("fit_penalized: diverged to non-finite values");
    if (max_change < opts.tol) {
      converged = true;
      ++sweep;
      break;
    }
  }

  if (family == Family::gaussian) eta = sc.X * theta;
  out.objective = penalized_objective(family, y, eta, theta, design.penalize, spec);
  if (!std::isfinite(out.objective))
    throw NumericalError("fit_penalized: non-finite objective");
  out.iterations = sweep;
  out.converged = converged;
  out.theta = theta.cwiseQuotient(sc.scale);
  return out;
}

PathResult lambda_path(const Eigen::VectorXd& y, const Design& design, Family family,
                       const PenaltySpec& spec_template, int n_lambda, double ratio,
                       const FitOptions& opts) {
  PathResult out;
  out.lambdas = make_lambda_grid(y, design, family, spec_template, n_lambda, ratio, opts);
  out.fits.reserve(static_cast<std::size_t>(n_lambda));
  FitOptions step_opts = opts;
  for (Eigen::Index i = 0; i < out.lambdas.size(); ++i) {
    FitResult fit = fit_penalized(y, design, family,
                                  spec_template.with_lambda(out.lambdas[i]), step_opts);
    step_opts.init = fit.theta;  // warm start the next grid point
    out.fits.push_back(std::move(fit));
  }
  return out;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> cv_splits(
    int n, const CvScheme& scheme, std::uint64_t seed) {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> splits;
  Rng rng(seed);
  const std::vector<int> perm = rng.permutation(n);
  if (scheme.kind == CvScheme::Kind::kfold) {
    const int k = scheme.folds;
    if (k < 2) throw InvalidArgument("cv_splits: need at least 2 folds");
    if (n < 3 * k) throw InvalidArgument("cv_splits: need n >= 3 x folds");
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) folds[static_cast<std::size_t>(i % k)].push_back(perm[i]);
    for (int f = 0; f < k; ++f) {
      std::vector<int> train;
      for (int g = 0; g < k; ++g) {
        if (g == f) continue;
        train.insert(train.end(), folds[static_cast<std::size_t>(g)].begin(),
                     folds[static_cast<std::size_t>(g)].end());
      }
      std::sort(train.begin(), train.end());
      std::vector<int> test = folds[static_cast<std::size_t>(f)];
      std::sort(test.begin(), test.end());
      splits.emplace_back(std::move(train), std::move(test));
    }
  } else {
    const int n_train = n / 3;
    if (n_train < 1 || n - n_train < 1)
      throw InvalidArgument("cv_splits: sample too small for holdout");
    std::vector<int> train(perm.begin(), perm.begin() + n_train);
    std::vector<int> test(perm.begin() + n_train, perm.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    splits.emplace_back(std::move(train), std::move(test));
  }
  return splits;
}

CvChoice cross_validate(const Eigen::VectorXd& y, const Design& design, Family family,
                        const PenaltySpec& spec_template, const CvScheme& scheme,
                        std::uint64_t seed, int n_lambda, double ratio,
                        const FitOptions& opts) {
  design.validate();
  check_response(family, y);
  const int n = static_cast<int>(y.size());

  CvChoice choice;
  choice.lambdas = make_lambda_grid(y, design, family, spec_template, n_lambda, ratio, opts);

  const auto splits = cv_splits(n, scheme, seed);

  Eigen::VectorXd total_loss = Eigen::VectorXd::Zero(choice.lambdas.size());
  double total_weight = 0.0;
  for (const auto& [train, test] : splits) {
    Design sub{subset_rows(design.X, train), design.penalize, design.intercept};
    const Eigen::VectorXd y_train = subset_rows(y, train);
    const Eigen::MatrixXd X_test = subset_rows(design.X, test);
    const Eigen::VectorXd y_test = subset_rows(y, test);
    FitOptions step_opts = opts;
    step_opts.init.reset();
    for (Eigen::Index i = 0; i < choice.lambdas.size(); ++i) {
      const FitResult fit = fit_penalized(
          y_train, sub, family, spec_template.with_lambda(choice.lambdas[i]), step_opts);
      step_opts.init = fit.theta;
      const auto [value, grad] = glm_loss(family, y_test, X_test, fit.theta);
      (void)grad;
      total_loss[i] += value * static_cast<double>(test.size());
    }
    total_weight += static_cast<double>(test.size());
  }
  choice.errors = total_loss / total_weight;

  // Grid is descending, so scanning with strict improvement keeps the
  // largest lambda among minimizers.
  int best = 0;
  for (Eigen::Index i = 1; i < choice.errors.size(); ++i) {
    if (choice.errors[i] < choice.errors[best]) best = static_cast<int>(i);
  }
  choice.index = best;
  choice.lambda = choice.lambdas[best];
  return choice;
}

Eigen::MatrixXd project_out(const Eigen::MatrixXd& F, const Eigen::MatrixXd& targets) {
  return residualize(F, targets);
}

Eigen::VectorXd project_out(const Eigen::MatrixXd& F, const Eigen::VectorXd& target) {
  return residualize(F, target);
}

double kkt_max_violation(const Eigen::VectorXd& y, const Design& design, Family family,
                         const PenaltySpec& spec, const Eigen::VectorXd& theta,
                         const FitOptions& opts) {
  const Scaled sc = scale_design(design, opts.standardize);
  const Eigen::VectorXd theta_int = theta.cwiseProduct(sc.scale);
  const auto n = static_cast<double>(y.size());
  const Eigen::VectorXd eta = sc.X * theta_int;
  Eigen::VectorXd mu(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    mu[i] = family == Family::gaussian ? eta[i] : sigmoid(eta[i]);
  const Eigen::VectorXd grad = sc.X.transpose() * (mu - y) / n;

  const double l = spec.lambda;
  const double g = spec.gamma;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta_int.size(); ++j) {
    const double t = theta_int[j];
    double viol;
    if (!design.penalize[static_cast<std::size_t>(j)]) {
      viol = std::abs(grad[j]);
    } else if (t == 0.0) {
      viol = std::max(0.0, std::abs(grad[j]) - l);
    } else {
      double dpen = 0.0;
      const double a = std::abs(t);
      const double s = t > 0 ? 1.0 : -1.0;
      switch (spec.kind) {
        case PenaltyKind::lasso:
          dpen = l * s;
          break;
        case PenaltyKind::mcp:
          dpen = a <= g * l ? (l - a / g) * s : 0.0;
          break;
        case PenaltyKind::scad:
          if (a <= l)
            dpen = l * s;
          else if (a <= g * l)
            dpen = (g * l - a) / (g - 1.0) * s;
          break;
      }
      viol = std::abs(grad[j] + dpen);
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

}  // namespace ffasm
