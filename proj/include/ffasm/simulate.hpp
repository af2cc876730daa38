#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ffasm/fda.hpp"
#include "ffasm/grid.hpp"
#include "ffasm/rng.hpp"

namespace ffasm {

enum class Scenario { factor, equal_corr };

// Synthetic-data configuration. Scenario `factor` drives the basis
// coefficients through a low-rank factor structure; `equal_corr` draws them
// from an equicorrelated Gaussian. Exactly one of K / rho applies.
struct ScenarioConfig {
  Scenario scenario = Scenario::factor;
  int n = 100;            // subjects
  int n_covariates = 20;  // functional covariates (G)
  int m = 10;             // Fourier basis functions per covariate
  int K = 0;              // factor count, scenario `factor` only
  double rho = -1.0;      // equicorrelation, scenario `equal_corr` only
  int grid_size = 51;     // uniform grid on [0,1]
  double noise_sd_curve = 0.5;
  double noise_sd_response = std::sqrt(0.1);
  double var_f = 25.0;
  double var_u = 1.0;
  double var_B = 1.0;
  // When true the loading matrix is drawn from the base seed only, so every
  // replication shares it; otherwise it is redrawn per replication.
  bool fix_loadings = false;
  std::uint64_t seed = 0;
  int rep = 0;  // replication index folded into the seed stream

  void validate() const;
  Grid make_grid() const;
};

struct GroundTruth {
  Eigen::MatrixXd scores;    // n x (G*m) basis coefficients, blocks of m
  Eigen::MatrixXd factors;   // n x K (factor scenario; 0 columns otherwise)
  Eigen::MatrixXd loadings;  // (G*m) x K
  std::vector<Eigen::VectorXd> betas;  // true coefficient curves on the grid
  std::vector<int> support;  // covariates with nonzero beta (0-based)
  std::vector<int> type1;    // strong-signal covariates
  std::vector<int> type2;    // weak single-signal covariates
};

struct SimulatedData {
  FunctionalSample sample;  // noisy curves on the grid
  Eigen::VectorXd responses;
  GroundTruth truth;
};

// True coefficient curves: covariates 0..3 get the harmonic attenuation
// sum_j j^{-2} phi_j, covariates 4..5 get (1/4) phi_2, the rest are zero.
std::vector<Eigen::VectorXd> true_betas(const ScenarioConfig& cfg);

// Same truth in basis coordinates, one row per covariate (G x m).
Eigen::MatrixXd true_beta_coefficients(const ScenarioConfig& cfg);

// Closed-form square root of the equicorrelation matrix
// (1-rho) I + rho J/..., i.e. sqrt(1-rho) I + c J with
// c = (sqrt(1+(p-1)rho) - sqrt(1-rho)) / p.
Eigen::MatrixXd equal_corr_sqrt(int p, double rho);

// y_i = sum_g integral beta_g X_i^(g) + N(0, sd^2), trapezoid quadrature.
Eigen::VectorXd gen_response_quadrature(const FunctionalSample& sample,
                                        const std::vector<Eigen::VectorXd>& betas,
                                        double sd, Rng& rng);

// Exact score-space form y = scores * vec(coeffs) + noise, for oracle use.
Eigen::VectorXd gen_response_scores(const Eigen::MatrixXd& scores,
                                    const Eigen::MatrixXd& coeffs, double sd, Rng& rng);

SimulatedData gen_scenario1(const ScenarioConfig& cfg);
SimulatedData gen_scenario2(const ScenarioConfig& cfg);
SimulatedData generate(const ScenarioConfig& cfg);  // dispatches on cfg.scenario

}  // namespace ffasm
