#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ffasm/factor.hpp"
#include "ffasm/fda.hpp"
#include "ffasm/grid.hpp"
#include "ffasm/penalized.hpp"

namespace ffasm {

// Stage shared by the augmented model and the baselines: center the sample,
// run per-covariate FPCA, and stack the scores. Fitting differences between
// methods then isolate what they do with the same score matrix.
struct ScoreBundle {
  Grid grid;
  std::vector<EigenSystem> eigensystems;   // one per covariate
  std::vector<Eigen::VectorXd> mean_curves;
  ScoreMatrix scores;                      // centered columns
};

ScoreBundle build_scores(const FunctionalSample& sample, const Truncation& truncation);

enum class FfasmPath { projection_linear, glm_augmented };

struct FfasmConfig {
  Truncation truncation = Truncation::by_fve(0.95);
  FactorSelectionConfig factor_selection;  // ratio criterion
  int fixed_K = 0;                         // > 0 skips factor selection
  PenaltySpec penalty = PenaltySpec::mcp(0.0);  // lambda filled by CV
  std::optional<double> fixed_lambda;      // set to skip CV
  Family family = Family::gaussian;
  FfasmPath path = FfasmPath::glm_augmented;
  // k-fold is the default tuner: the single-split scheme trains on floor(n/3)
  // rows, which under-fits at the simulation-study sample sizes and chooses
  // unstable penalties (see the experiment configs shipped with the CLI).
  CvScheme cv = CvScheme::kfold(5);
  int n_lambda = 50;
  double lambda_ratio = 1e-3;
  // The augmented-GLM objective penalizes the intercept along with the score
  // coefficients; flip to exempt it.
  bool penalize_intercept = true;
  // Optional magnitude threshold on max|eta_j| per covariate; 0 keeps the
  // exact-zero selection rule.
  double selection_threshold = 0.0;
  std::uint64_t seed = 0;
  FitOptions fit;

  void validate() const;
};

struct FfasmFit {
  double beta0 = 0.0;       // augmented-GLM intercept (0 on the projection path)
  Eigen::VectorXd H;        // score coefficients stacked by covariate
  Eigen::VectorXd gamma;    // factor coefficients (empty on the projection path)
  std::vector<Eigen::VectorXd> beta_curves;
  std::vector<int> selected;  // 0-based covariate indices
  std::vector<EigenSystem> eigensystems;
  FactorDecomposition factors;
  double lambda = 0.0;
  int K = 0;                // 0 marks a baseline fit without augmentation
  std::vector<int> m_per_covariate;
  std::vector<Eigen::VectorXd> mean_curves;
  double mu_y = 0.0;        // training mean response
  // Base level of the prediction rule on the linear-predictor scale. The
  // projection path uses the training mean response; the augmented-GLM path
  // uses the intercept plus the average factor contribution left over after
  // folding the score coefficients into curves.
  double base = 0.0;
  Family family = Family::gaussian;
  FfasmPath path = FfasmPath::projection_linear;
  Grid grid;
  CvChoice cv;              // populated when lambda came from cross-validation
  std::vector<std::string> warnings;
};

// One coefficient curve per covariate block: beta_g = functions_g * eta_g.
std::vector<Eigen::VectorXd> reconstruct_beta(const Eigen::VectorXd& H,
                                              const std::vector<EigenSystem>& eigensystems);

// Picks lambda (cross-validation unless cfg.fixed_lambda), refits on the full
// data with warm starts down the grid, and records lambda/cv/warnings into
// `fit`. Returns the coefficient vector of the final fit.
Eigen::VectorXd fit_with_lambda_choice(const Eigen::VectorXd& y, const Design& design,
                                       const FfasmConfig& cfg, FfasmFit& fit);

// Applies the optional magnitude threshold to fit.H, reconstructs
// fit.beta_curves, and fills fit.selected from the nonzero blocks.
void finalize_selection(FfasmFit& fit, double threshold);

FfasmFit fit_ffasm(const ScoreBundle& bundle, const Eigen::VectorXd& y,
                   const FfasmConfig& cfg);
FfasmFit fit_ffasm(const FunctionalSample& sample, const Eigen::VectorXd& y,
                   const FfasmConfig& cfg);

// y_hat_i = base + sum_g integral beta_g (X_i^(g) - mean_g); the factor term
// is folded into `base` (see FfasmFit::base). Logistic fits map the linear
// predictor through the logistic function, so predictions are probabilities.
Eigen::VectorXd predict(const FfasmFit& fit, const FunctionalSample& new_sample);

}  // namespace ffasm
