#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace ffasm {

enum class PenaltyKind { lasso, mcp, scad };

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::mcp;
  double lambda = 0.0;
  double gamma = 3.0;

  static PenaltySpec lasso(double lambda);
  static PenaltySpec mcp(double lambda, double gamma = 3.0);
  static PenaltySpec scad(double lambda, double gamma = 3.7);

  PenaltySpec with_lambda(double l) const;
  void validate() const;  // lambda >= 0; mcp gamma > 1; scad gamma > 2
};

// Penalty evaluated at t; even in t and 0 at 0.
double penalty_value(const PenaltySpec& spec, double t);

// argmin_t (t - z)^2 / (2 step) + penalty(t), closed form per penalty.
double prox(const PenaltySpec& spec, double z, double step);

enum class Family { gaussian, logistic };

// Design matrix with a per-column penalization mask. `intercept` marks the
// all-ones column when present (-1 otherwise); it is exempt from internal
// standardization but may still be penalized.
struct Design {
  Eigen::MatrixXd X;
  std::vector<bool> penalize;
  int intercept = -1;

  void validate() const;
};

struct FitOptions {
  double tol = 1e-7;
  int max_iter = 10000;
  // Rescale penalized columns to unit root mean square before fitting and
  // map coefficients back afterwards. Columns are not re-centered, so
  // designs without an intercept stay valid.
  bool standardize = true;
  std::optional<Eigen::VectorXd> init;  // warm start, original scale
};

struct FitResult {
  Eigen::VectorXd theta;  // original scale
  double objective = 0.0;  // penalized objective as minimized (internal scale)
  int iterations = 0;
  bool converged = false;
  double lambda = 0.0;
};

// (value, gradient) of the negative log-likelihood scaled by 1/n:
// value = (1/n) sum_i [-y_i eta_i + b(eta_i)], gradient = (1/n) X^T (b'(eta) - y).
std::pair<double, Eigen::VectorXd> glm_loss(Family family, const Eigen::VectorXd& y,
                                            const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& theta);

// Cyclic coordinate descent. Gaussian coordinates are minimized exactly with
// curvature x_j^T x_j / n; logistic uses the b'' <= 1/4 majorization.
// Unpenalized coordinates take plain least-squares steps. Non-convergence
// returns converged=false with the last iterate.
FitResult fit_penalized(const Eigen::VectorXd& y, const Design& design, Family family,
                        const PenaltySpec& spec, const FitOptions& opts = {});

struct PathResult {
  Eigen::VectorXd lambdas;       // descending
  std::vector<FitResult> fits;   // one per lambda, warm-started
};

// Geometric grid from lambda_max (smallest lambda zeroing all penalized
// coefficients at the null fit) down to lambda_max * ratio.
PathResult lambda_path(const Eigen::VectorXd& y, const Design& design, Family family,
                       const PenaltySpec& spec_template, int n_lambda = 50,
                       double ratio = 1e-3, const FitOptions& opts = {});

struct CvScheme {
  enum class Kind { kfold, holdout_third };
  Kind kind = Kind::holdout_third;
  int folds = 5;

  static CvScheme kfold(int k) { return {Kind::kfold, k}; }
  static CvScheme holdout_third() { return {Kind::holdout_third, 0}; }
};

struct CvChoice {
  double lambda = 0.0;
  int index = 0;
  Eigen::VectorXd lambdas;
  Eigen::VectorXd errors;  // mean held-out loss per lambda
};

// Deterministic (train, test) row splits for a scheme; each part is sorted.
// kfold shuffles then deals rounds; holdout_third fits on a random
// floor(n/3) subset and evaluates on the rest.
std::vector<std::pair<std::vector<int>, std::vector<int>>> cv_splits(
    int n, const CvScheme& scheme, std::uint64_t seed);

// Picks lambda over the path grid by held-out loss. kfold: mean out-of-fold
// loss; holdout_third: fit on a random floor(n/3) subset, evaluate on the
// rest. Ties go to the larger lambda.
CvChoice cross_validate(const Eigen::VectorXd& y, const Design& design, Family family,
                        const PenaltySpec& spec_template, const CvScheme& scheme,
                        std::uint64_t seed, int n_lambda = 50, double ratio = 1e-3,
                        const FitOptions& opts = {});

// (I - P_F) target via least squares; the n x n projector is never formed.
Eigen::MatrixXd project_out(const Eigen::MatrixXd& F, const Eigen::MatrixXd& targets);
Eigen::VectorXd project_out(const Eigen::MatrixXd& F, const Eigen::VectorXd& target);

// Largest stationarity violation of theta for the penalized problem, in the
// same scale fit_penalized minimizes (honoring opts.standardize).
double kkt_max_violation(const Eigen::VectorXd& y, const Design& design, Family family,
                         const PenaltySpec& spec, const Eigen::VectorXd& theta,
                         const FitOptions& opts = {});

}  // namespace ffasm
