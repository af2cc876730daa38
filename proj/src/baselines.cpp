#include "ffasm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Eigenvalues>

#include "ffasm/errors.hpp"

namespace ffasm {

namespace {

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd subset_rows(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

double group_lambda_scale(int width, bool scale_group_lambda) {
  return scale_group_lambda ? std::sqrt(static_cast<double>(width)) : 1.0;
}

// Intercept-plus-centered-scores design shared by both baselines.
Design scores_design(const ScoreBundle& bundle) {
  const int n = bundle.scores.n();
  const int p = bundle.scores.p();
  Eigen::MatrixXd X(n, 1 + p);
  X.col(0).setOnes();
  X.rightCols(p) = bundle.scores.data;
  std::vector<bool> mask(static_cast<std::size_t>(1 + p), true);
  mask[0] = false;
  return Design{std::move(X), std::move(mask), 0};
}

void fill_common_fields(FfasmFit& fit, const ScoreBundle& bundle, const Eigen::VectorXd& y) {
  fit.grid = bundle.grid;
  fit.eigensystems = bundle.eigensystems;
  fit.mean_curves = bundle.mean_curves;
  fit.family = Family::gaussian;
  fit.mu_y = y.mean();
  fit.K = 0;
  for (const auto& es : bundle.eigensystems) fit.m_per_covariate.push_back(es.m);
}

}  // namespace

GroupStructure GroupStructure::from_blocks(const ScoreMatrix& scores, int column_offset) {
  GroupStructure gs;
  gs.groups.reserve(scores.blocks.size());
  for (const auto& b : scores.blocks) gs.groups.emplace_back(b.offset + column_offset, b.m);
  return gs;
}

void GroupStructure::validate(int n_columns) const {
  std::vector<char> seen(static_cast<std::size_t>(n_columns), 0);
  for (const auto& [offset, width] : groups) {
    if (width < 1) throw InvalidArgument("GroupStructure: empty group");
    if (offset < 0 || offset + width > n_columns)
      throw InvalidArgument("GroupStructure: group outside the design");
    for (int j = offset; j < offset + width; ++j) {
      if (seen[static_cast<std::size_t>(j)])
        throw InvalidArgument("GroupStructure: overlapping groups");
      seen[static_cast<std::size_t>(j)] = 1;
    }
  }
}

FitResult fit_penalized_groups(const Eigen::VectorXd& y, const Design& design,
                               const GroupStructure& groups, const PenaltySpec& spec,
                               const FitOptions& opts, bool scale_group_lambda) {
  design.validate();
  spec.validate();
  const Eigen::Index d = design.X.cols();
  groups.validate(static_cast<int>(d));
  if (design.X.rows() != y.size())
    throw ShapeMismatch("fit_penalized_groups: y length mismatch");
  const Eigen::Index n = y.size();
  const auto nd = static_cast<double>(n);

  std::vector<char> grouped(static_cast<std::size_t>(d), 0);
  for (const auto& [offset, width] : groups.groups)
    for (int j = offset; j < offset + width; ++j) grouped[static_cast<std::size_t>(j)] = 1;

  Eigen::MatrixXd X = design.X;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
  if (opts.standardize) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!grouped[static_cast<std::size_t>(j)] || j == design.intercept) continue;
      const double rms = std::sqrt(X.col(j).squaredNorm() / nd);
      if (rms > 1e-12) {
        scale[j] = rms;
        X.col(j) /= rms;
      }
    }
  }
  const Eigen::VectorXd colsq_n = X.colwise().squaredNorm() / nd;

  // Majorization curvature per group: largest eigenvalue of the Gram block.
  std::vector<double> curvature;
  curvature.reserve(groups.groups.size());
  for (const auto& [offset, width] : groups.groups) {
    const Eigen::MatrixXd gram =
        X.middleCols(offset, width).transpose() * X.middleCols(offset, width) / nd;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    curvature.push_back(std::max(es.eigenvalues().maxCoeff(), 1e-12));
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  if (opts.init) {
    if (opts.init->size() != d)
      throw ShapeMismatch("fit_penalized_groups: init length mismatch");
    theta = opts.init->cwiseProduct(scale);
  }
  Eigen::VectorXd resid = y - X * theta;

  bool converged = false;
  int sweep = 0;
  for (; sweep < opts.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (grouped[static_cast<std::size_t>(j)] || colsq_n[j] <= 1e-14) continue;
      const double z = X.col(j).dot(resid) / nd + colsq_n[j] * theta[j];
      const double updated = z / colsq_n[j];
      const double delta = updated - theta[j];
      if (delta != 0.0) {
        theta[j] = updated;
        resid -= X.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    for (std::size_t gi = 0; gi < groups.groups.size(); ++gi) {
      const auto [offset, width] = groups.groups[gi];
      const double L = curvature[gi];
      const auto Xg = X.middleCols(offset, width);
      const Eigen::VectorXd zg =
          theta.segment(offset, width) + Xg.transpose() * resid / (nd * L);
      const double znorm = zg.norm();
      const PenaltySpec gspec =
          spec.with_lambda(spec.lambda * group_lambda_scale(width, scale_group_lambda));
      Eigen::VectorXd updated = Eigen::VectorXd::Zero(width);
      if (znorm > 0.0) {
        const double s = prox(gspec, znorm, 1.0 / L);
        if (s != 0.0) updated = (s / znorm) * zg;
      }
      const Eigen::VectorXd delta = updated - theta.segment(offset, width);
      const double dmax = delta.cwiseAbs().maxCoeff();
      if (dmax != 0.0) {
        theta.segment(offset, width) = updated;
        resid -= Xg * delta;
        max_change = std::max(max_change, dmax);
      }
    }
    if (!std::isfinite(max_change) || !theta.allFinite())
      throw NumericalError("fit_penalized_groups: diverged to non-finite values");
    if (max_change < opts.tol) {
      converged = true;
      ++sweep;
      break;
    }
  }

  const Eigen::VectorXd eta = X * theta;
  double objective = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    objective += -y[i] * eta[i] + 0.5 * eta[i] * eta[i];
  objective /= nd;
  for (std::size_t gi = 0; gi < groups.groups.size(); ++gi) {
    const auto [offset, width] = groups.groups[gi];
    const PenaltySpec gspec =
        spec.with_lambda(spec.lambda * group_lambda_scale(width, scale_group_lambda));
    objective += penalty_value(gspec, theta.segment(offset, width).norm());
  }

  FitResult out;
  out.theta = theta.cwiseQuotient(scale);
  out.objective = objective;
  out.iterations = sweep;
  out.converged = converged;
  out.lambda = spec.lambda;
  return out;
}

FfasmFit fit_mcp_scores(const ScoreBundle& bundle, const Eigen::VectorXd& y,
                        const FfasmConfig& cfg) {
  cfg.validate();
  if (cfg.family != Family::gaussian)
    throw InvalidArgument("fit_mcp_scores: gaussian family required");
  if (y.size() != bundle.scores.n())
    throw ShapeMismatch("fit_mcp_scores: response length differs from sample size");

  FfasmFit fit;
  fill_common_fields(fit, bundle, y);
  const Design design = scores_design(bundle);
  const Eigen::VectorXd theta = fit_with_lambda_choice(y, design, cfg, fit);
  fit.beta0 = theta[0];
  fit.H = theta.tail(bundle.scores.p());
  fit.base = fit.beta0;
  finalize_selection(fit, cfg.selection_threshold);
  return fit;
}

FfasmFit fit_group_mcp(const ScoreBundle& bundle, const Eigen::VectorXd& y,
                       const FfasmConfig& cfg, bool scale_group_lambda) {
  cfg.validate();
  if (cfg.family != Family::gaussian)
    throw InvalidArgument("fit_group_mcp: gaussian family required");
  const int n = bundle.scores.n();
  const int p = bundle.scores.p();
  if (y.size() != n)
    throw ShapeMismatch("fit_group_mcp: response length differs from sample size");

  FfasmFit fit;
  fill_common_fields(fit, bundle, y);
  const Design design = scores_design(bundle);
  const GroupStructure groups = GroupStructure::from_blocks(bundle.scores, 1);

  Eigen::VectorXd grid;
  if (cfg.fixed_lambda) {
    grid = Eigen::VectorXd::Constant(1, *cfg.fixed_lambda);
    fit.lambda = *cfg.fixed_lambda;
  } else {
    // Null model is the plain mean, so the entry threshold per group is the
    // norm of its gradient block at theta = 0 (internal scale).
    Eigen::MatrixXd X = design.X;
    if (cfg.fit.standardize) {
      for (int j = 1; j <= p; ++j) {
        const double rms = std::sqrt(X.col(j).squaredNorm() / n);
        if (rms > 1e-12) X.col(j) /= rms;
      }
    }
    const Eigen::VectorXd r0 = y.array() - y.mean();
    double lambda_max = 0.0;
    for (const auto& [offset, width] : groups.groups) {
      const double gnorm = (X.middleCols(offset, width).transpose() * r0 / n).norm();
      lambda_max = std::max(lambda_max, gnorm / group_lambda_scale(width, scale_group_lambda));
    }
    lambda_max = std::max(lambda_max, 1e-12);
    grid.resize(cfg.n_lambda);
    if (cfg.n_lambda == 1) {
      grid[0] = lambda_max;
    } else {
      const double step = std::log(cfg.lambda_ratio) / (cfg.n_lambda - 1);
      for (int i = 0; i < cfg.n_lambda; ++i) grid[i] = lambda_max * std::exp(step * i);
    }

    const auto splits = cv_splits(n, cfg.cv, cfg.seed);
    Eigen::VectorXd total_loss = Eigen::VectorXd::Zero(grid.size());
    double total_weight = 0.0;
    for (const auto& [train, test] : splits) {
      Design sub{subset_rows(design.X, train), design.penalize, design.intercept};
      const Eigen::VectorXd y_train = subset_rows(y, train);
      const Eigen::MatrixXd X_test = subset_rows(design.X, test);
      const Eigen::VectorXd y_test = subset_rows(y, test);
      FitOptions step_opts = cfg.fit;
      step_opts.init.reset();
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const FitResult r = fit_penalized_groups(y_train, sub, groups,
                                                 cfg.penalty.with_lambda(grid[i]),
                                                 step_opts, scale_group_lambda);
        step_opts.init = r.theta;
        const auto [value, gradient] =
            glm_loss(Family::gaussian, y_test, X_test, r.theta);
        (void)gradient;
        total_loss[i] += value * static_cast<double>(test.size());
      }
      total_weight += static_cast<double>(test.size());
    }
    fit.cv.lambdas = grid;
    fit.cv.errors = total_loss / total_weight;
    int best = 0;
    for (Eigen::Index i = 1; i < fit.cv.errors.size(); ++i)
      if (fit.cv.errors[i] < fit.cv.errors[best]) best = static_cast<int>(i);
    fit.cv.index = best;
    fit.cv.lambda = grid[best];
    fit.lambda = fit.cv.lambda;
    grid.conservativeResize(best + 1);  // warm-start path down to the choice
  }

  FitOptions step_opts = cfg.fit;
  FitResult final;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    final = fit_penalized_groups(y, design, groups, cfg.penalty.with_lambda(grid[i]),
                                 step_opts, scale_group_lambda);
    step_opts.init = final.theta;
  }
  if (!final.converged) fit.warnings.push_back("group fit did not converge");
  fit.beta0 = final.theta[0];
  fit.H = final.theta.tail(p);
  fit.base = fit.beta0;
  finalize_selection(fit, cfg.selection_threshold);
  return fit;
}

}  // namespace ffasm
