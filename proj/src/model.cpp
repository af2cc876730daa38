#include "ffasm/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ffasm/errors.hpp"

namespace ffasm {

namespace {

double logistic_cdf(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

void zero_small_blocks(Eigen::VectorXd& H, const std::vector<EigenSystem>& systems,
                       double threshold) {
  Eigen::Index offset = 0;
  for (const auto& es : systems) {
    auto block = H.segment(offset, es.m);
    if (block.cwiseAbs().maxCoeff() <= threshold) block.setZero();
    offset += es.m;
  }
}

}  // namespace

Eigen::VectorXd fit_with_lambda_choice(const Eigen::VectorXd& y, const Design& design,
                                       const FfasmConfig& cfg, FfasmFit& fit) {
  if (cfg.fixed_lambda) {
    const FitResult r = fit_penalized(y, design, cfg.family,
                                      cfg.penalty.with_lambda(*cfg.fixed_lambda), cfg.fit);
    fit.lambda = *cfg.fixed_lambda;
    if (!r.converged) fit.warnings.push_back("penalized fit did not converge");
    return r.theta;
  }
  fit.cv = cross_validate(y, design, cfg.family, cfg.penalty, cfg.cv, cfg.seed,
                          cfg.n_lambda, cfg.lambda_ratio, cfg.fit);
  fit.lambda = fit.cv.lambda;
  FitOptions step = cfg.fit;
  FitResult final;
  for (int i = 0; i <= fit.cv.index; ++i) {
    final = fit_penalized(y, design, cfg.family,
                          cfg.penalty.with_lambda(fit.cv.lambdas[i]), step);
    step.init = final.theta;
  }
  if (!final.converged) fit.warnings.push_back("penalized fit did not converge");
  return final.theta;
}

void finalize_selection(FfasmFit& fit, double threshold) {
  if (threshold > 0.0) zero_small_blocks(fit.H, fit.eigensystems, threshold);
  fit.beta_curves = reconstruct_beta(fit.H, fit.eigensystems);
  fit.selected.clear();
  Eigen::Index offset = 0;
  for (std::size_t g = 0; g < fit.eigensystems.size(); ++g) {
    const auto block = fit.H.segment(offset, fit.eigensystems[g].m);
    if ((block.array() != 0.0).any()) fit.selected.push_back(static_cast<int>(g));
    offset += fit.eigensystems[g].m;
  }
}

ScoreBundle build_scores(const FunctionalSample& sample, const Truncation& truncation) {
  sample.validate();
  ScoreBundle bundle;
  bundle.grid = sample.grid;
  const FunctionalSample centered = center_sample(sample, &bundle.mean_curves);
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(static_cast<std::size_t>(centered.G()));
  for (int g = 0; g < centered.G(); ++g) {
    EigenSystem es = fpca(sample_covariance(centered, g), centered.grid, truncation);
    es.covariate = g;
    blocks.push_back(compute_scores(centered, es));
    bundle.eigensystems.push_back(std::move(es));
  }
  bundle.scores = assemble_scores(blocks);
  return bundle;
}

void FfasmConfig::validate() const {
  if (path == FfasmPath::projection_linear && family != Family::gaussian)
    throw InvalidArgument("FfasmConfig: the projection path requires the gaussian family");
  if (n_lambda < 1) throw InvalidArgument("FfasmConfig: n_lambda must be >= 1");
  if (!(lambda_ratio > 0.0 && lambda_ratio <= 1.0))
    throw InvalidArgument("FfasmConfig: lambda_ratio must lie in (0,1]");
  if (selection_threshold < 0.0)
    throw InvalidArgument("FfasmConfig: selection_threshold must be >= 0");
  if (fixed_K < 0) throw InvalidArgument("FfasmConfig: fixed_K must be >= 0");
  if (fixed_lambda && *fixed_lambda < 0.0)
    throw InvalidArgument("FfasmConfig: fixed_lambda must be >= 0");
  PenaltySpec probe = penalty;
  probe.lambda = fixed_lambda ? *fixed_lambda : 0.0;
  probe.validate();
}

std::vector<Eigen::VectorXd> reconstruct_beta(const Eigen::VectorXd& H,
                                              const std::vector<EigenSystem>& eigensystems) {
  Eigen::Index total = 0;
  for (const auto& es : eigensystems) total += es.m;
  if (total != H.size())
    throw ShapeMismatch("reconstruct_beta: coefficient length differs from block widths");
  std::vector<Eigen::VectorXd> curves;
  curves.reserve(eigensystems.size());
  Eigen::Index offset = 0;
  for (const auto& es : eigensystems) {
    curves.push_back(es.functions * H.segment(offset, es.m));
    offset += es.m;
  }
  return curves;
}

FfasmFit fit_ffasm(const ScoreBundle& bundle, const Eigen::VectorXd& y,
                   const FfasmConfig& cfg) {
  cfg.validate();
  const int n = bundle.scores.n();
  const int p = bundle.scores.p();
  if (y.size() != n) throw ShapeMismatch("fit_ffasm: response length differs from sample size");

  FfasmFit fit;
  fit.grid = bundle.grid;
  fit.eigensystems = bundle.eigensystems;
  fit.mean_curves = bundle.mean_curves;
  fit.family = cfg.family;
  fit.path = cfg.path;
  fit.mu_y = y.mean();
  for (const auto& es : bundle.eigensystems) fit.m_per_covariate.push_back(es.m);

  int K = cfg.fixed_K > 0 ? cfg.fixed_K
                          : select_num_factors_ratio(bundle.scores, cfg.factor_selection).K;
  if (K < 1) {
    K = 1;
    fit.warnings.push_back("factor selection returned no factors; continuing with K = 1");
  }
  K = std::min(K, std::min(n, p));
  fit.factors = estimate_factors(bundle.scores, K);
  fit.K = K;

  if (cfg.path == FfasmPath::projection_linear) {
    if (n <= K) throw InsufficientData("fit_ffasm: projection path needs n > K");
    const Eigen::VectorXd y_centered = y.array() - fit.mu_y;
    const Eigen::VectorXd y_proj = project_out(fit.factors.F, y_centered);
    Design design{project_out(fit.factors.F, fit.factors.U),
                  std::vector<bool>(static_cast<std::size_t>(p), true), -1};
    fit.H = fit_with_lambda_choice(y_proj, design, cfg, fit);
    fit.beta0 = 0.0;
    fit.base = fit.mu_y;
  } else {
    Eigen::MatrixXd X(n, 1 + p + K);
    X.col(0).setOnes();
    X.middleCols(1, p) = fit.factors.U;
    X.rightCols(K) = fit.factors.F;
    std::vector<bool> mask(static_cast<std::size_t>(1 + p + K), false);
    mask[0] = cfg.penalize_intercept;
    for (int j = 1; j <= p; ++j) mask[static_cast<std::size_t>(j)] = true;
    Design design{std::move(X), std::move(mask), 0};
    const Eigen::VectorXd theta = fit_with_lambda_choice(y, design, cfg, fit);
    fit.beta0 = theta[0];
    fit.H = theta.segment(1, p);
    fit.gamma = theta.tail(K);
    const Eigen::VectorXd f_bar = fit.factors.F.colwise().mean();
    fit.base = fit.beta0 + f_bar.dot(fit.gamma - fit.factors.B.transpose() * fit.H);
  }

  finalize_selection(fit, cfg.selection_threshold);
  return fit;
}

FfasmFit fit_ffasm(const FunctionalSample& sample, const Eigen::VectorXd& y,
                   const FfasmConfig& cfg) {
  return fit_ffasm(build_scores(sample, cfg.truncation), y, cfg);
}

Eigen::VectorXd predict(const FfasmFit& fit, const FunctionalSample& new_sample) {
  new_sample.validate();
  if (new_sample.G() != static_cast<int>(fit.beta_curves.size()))
    throw GridMismatch("predict: covariate count differs from the fitted model");
  if (new_sample.grid.size() != fit.grid.size() ||
      (new_sample.grid.points - fit.grid.points).cwiseAbs().maxCoeff() > 1e-12)
    throw GridMismatch("predict: sample grid differs from the fitted grid");

  Eigen::VectorXd eta = Eigen::VectorXd::Constant(new_sample.n(), fit.base);
  for (int g = 0; g < new_sample.G(); ++g) {
    const Eigen::VectorXd wb = fit.grid.weights.cwiseProduct(fit.beta_curves[g]);
    eta += new_sample.curves[g] * wb;
    eta.array() -= fit.mean_curves[g].dot(wb);
  }
  if (fit.family == Family::gaussian) return eta;
  Eigen::VectorXd probs(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) probs[i] = logistic_cdf(eta[i]);
  return probs;
}

}  // namespace ffasm
