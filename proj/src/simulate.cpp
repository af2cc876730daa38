#include "ffasm/simulate.hpp"

#include <cmath>

#include "ffasm/errors.hpp"

namespace ffasm {

namespace {

// Seed streams; loadings may be tied to the base seed (fix_loadings).
constexpr std::uint64_t kStreamLoadings = 1;
constexpr std::uint64_t kStreamScores = 2;
constexpr std::uint64_t kStreamCurveNoise = 3;
constexpr std::uint64_t kStreamResponse = 4;

std::uint64_t rep_seed(const ScenarioConfig& cfg) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(cfg.rep));
}

FunctionalSample curves_from_scores(const ScenarioConfig& cfg, const Grid& grid,
                                    const Eigen::MatrixXd& scores, Rng& noise_rng) {
  const Eigen::MatrixXd basis = fourier_basis(cfg.m, grid);  // L x m
  FunctionalSample sample;
  sample.grid = grid;
  sample.centered = false;
  sample.curves.reserve(static_cast<std::size_t>(cfg.n_covariates));
  for (int g = 0; g < cfg.n_covariates; ++g) {
    Eigen::MatrixXd x = scores.middleCols(static_cast<Eigen::Index>(g) * cfg.m, cfg.m) *
                        basis.transpose();
    if (cfg.noise_sd_curve > 0.0)
      x += cfg.noise_sd_curve * noise_rng.normal_matrix(cfg.n, grid.size());
    sample.curves.push_back(std::move(x));
  }
  return sample;
}

SimulatedData finish(const ScenarioConfig& cfg, Eigen::MatrixXd scores,
                     Eigen::MatrixXd factors, Eigen::MatrixXd loadings) {
  const Grid grid = cfg.make_grid();
  const std::uint64_t rseed = rep_seed(cfg);

  SimulatedData data;
  data.truth.scores = std::move(scores);
  data.truth.factors = std::move(factors);
  data.truth.loadings = std::move(loadings);
  data.truth.betas = true_betas(cfg);
  data.truth.type1 = {0, 1, 2, 3};
  data.truth.type2 = {4, 5};
  data.truth.support = {0, 1, 2, 3, 4, 5};

  Rng noise_rng(derive_seed(rseed, kStreamCurveNoise));
  data.sample = curves_from_scores(cfg, grid, data.truth.scores, noise_rng);

  Rng response_rng(derive_seed(rseed, kStreamResponse));
  data.responses = gen_response_quadrature(data.sample, data.truth.betas,
                                           cfg.noise_sd_response, response_rng);
  return data;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n < 2) throw InvalidArgument("ScenarioConfig: need n >= 2");
  if (n_covariates < 1) throw InvalidArgument("ScenarioConfig: need n_covariates >= 1");
  if (m < 2) throw InvalidArgument("ScenarioConfig: need m >= 2");
  if (grid_size < 2) throw InvalidArgument("ScenarioConfig: need grid_size >= 2");
  if (noise_sd_curve < 0.0 || noise_sd_response < 0.0)
    throw InvalidArgument("ScenarioConfig: noise sds must be >= 0");
  if (scenario == Scenario::factor) {
    if (K < 1 || K > 6) throw InvalidArgument("ScenarioConfig: factor scenario needs K in [1,6]");
    if (rho >= 0.0)
      throw InvalidArgument("ScenarioConfig: rho is not used by the factor scenario");
    if (var_f <= 0.0 || var_u < 0.0 || var_B <= 0.0)
      throw InvalidArgument("ScenarioConfig: factor variances must be positive");
  } else {
    if (!(rho >= 0.0 && rho < 1.0))
      throw InvalidArgument("ScenarioConfig: rho must lie in [0,1)");
    if (K != 0)
      throw InvalidArgument("ScenarioConfig: K is not used by the equal-correlation scenario");
  }
}

Grid ScenarioConfig::make_grid() const { return Grid::uniform(0.0, 1.0, grid_size); }

std::vector<Eigen::VectorXd> true_betas(const ScenarioConfig& cfg) {
  const Grid grid = cfg.make_grid();
  const Eigen::MatrixXd basis = fourier_basis(cfg.m, grid);
  const Eigen::MatrixXd coeffs = true_beta_coefficients(cfg);
  std::vector<Eigen::VectorXd> betas;
  betas.reserve(static_cast<std::size_t>(cfg.n_covariates));
  for (int g = 0; g < cfg.n_covariates; ++g)
    betas.push_back(basis * coeffs.row(g).transpose());
  return betas;
}

Eigen::MatrixXd true_beta_coefficients(const ScenarioConfig& cfg) {
  if (cfg.m < 2) throw InvalidArgument("true_beta_coefficients: need m >= 2");
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(cfg.n_covariates, cfg.m);
  for (int g = 0; g < std::min(cfg.n_covariates, 4); ++g)
    for (int j = 0; j < cfg.m; ++j)
      coeffs(g, j) = 1.0 / static_cast<double>((j + 1) * (j + 1));
  for (int g = 4; g < std::min(cfg.n_covariates, 6); ++g) coeffs(g, 1) = 0.25;
  return coeffs;
}

Eigen::MatrixXd equal_corr_sqrt(int p, double rho) {
  if (p < 1) throw InvalidArgument("equal_corr_sqrt: need p >= 1");
  if (!(rho >= 0.0 && rho < 1.0))
    throw InvalidArgument("equal_corr_sqrt: rho must lie in [0,1)");
  const double a = std::sqrt(1.0 - rho);
  const double c =
      (std::sqrt(1.0 + (static_cast<double>(p) - 1.0) * rho) - a) / static_cast<double>(p);
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(p, p, c);
  s.diagonal().array() += a;
  return s;
}

Eigen::VectorXd gen_response_quadrature(const FunctionalSample& sample,
                                        const std::vector<Eigen::VectorXd>& betas,
                                        double sd, Rng& rng) {
  if (betas.size() != sample.curves.size())
    throw GridMismatch("gen_response_quadrature: one beta per covariate required");
  const Eigen::Index n = sample.curves.empty() ? 0 : sample.curves.front().rows();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (std::size_t g = 0; g < betas.size(); ++g) {
    if (betas[g].size() != sample.grid.size())
      throw GridMismatch("gen_response_quadrature: beta not on the sample grid");
    y += sample.curves[g] * sample.grid.weights.cwiseProduct(betas[g]);
  }
  if (sd > 0.0) y += sd * rng.normal_vector(static_cast<int>(n));
  return y;
}

Eigen::VectorXd gen_response_scores(const Eigen::MatrixXd& scores,
                                    const Eigen::MatrixXd& coeffs, double sd, Rng& rng) {
  if (scores.cols() != coeffs.rows() * coeffs.cols())
    throw GridMismatch("gen_response_scores: score width must equal G*m");
  Eigen::VectorXd flat(scores.cols());
  for (Eigen::Index g = 0; g < coeffs.rows(); ++g)
    flat.segment(g * coeffs.cols(), coeffs.cols()) = coeffs.row(g).transpose();
  Eigen::VectorXd y = scores * flat;
  if (sd > 0.0) y += sd * rng.normal_vector(static_cast<int>(scores.rows()));
  return y;
}

SimulatedData gen_scenario1(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.scenario != Scenario::factor)
    throw InvalidArgument("gen_scenario1: config is not the factor scenario");
  const int p = cfg.n_covariates * cfg.m;
  const std::uint64_t rseed = rep_seed(cfg);

  Rng loadings_rng(
      derive_seed(cfg.fix_loadings ? cfg.seed : rseed, kStreamLoadings));
  const Eigen::MatrixXd B =
      std::sqrt(cfg.var_B) * loadings_rng.normal_matrix(p, cfg.K);

  Rng score_rng(derive_seed(rseed, kStreamScores));
  const Eigen::MatrixXd F = std::sqrt(cfg.var_f) * score_rng.normal_matrix(cfg.n, cfg.K);
  Eigen::MatrixXd scores = F * B.transpose();
  if (cfg.var_u > 0.0)
    scores += std::sqrt(cfg.var_u) * score_rng.normal_matrix(cfg.n, p);

  return finish(cfg, std::move(scores), F, B);
}

SimulatedData gen_scenario2(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.scenario != Scenario::equal_corr)
    throw InvalidArgument("gen_scenario2: config is not the equal-correlation scenario");
  const int p = cfg.n_covariates * cfg.m;

  Rng score_rng(derive_seed(rep_seed(cfg), kStreamScores));
  const Eigen::MatrixXd z = score_rng.normal_matrix(cfg.n, p);
  Eigen::MatrixXd scores = z * equal_corr_sqrt(p, cfg.rho);  // symmetric root

  return finish(cfg, std::move(scores), Eigen::MatrixXd(cfg.n, 0),
                Eigen::MatrixXd(p, 0));
}

SimulatedData generate(const ScenarioConfig& cfg) {
  return cfg.scenario == Scenario::factor ? gen_scenario1(cfg) : gen_scenario2(cfg);
}

}  // namespace ffasm
