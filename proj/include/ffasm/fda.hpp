#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "ffasm/grid.hpp"

namespace ffasm {

// One longitudinal observation of covariate g for one subject.
struct ObservationRecord {
  int subject;
  int covariate;  // 0-based internally; external CSV uses 1-based ids
  double time;
  double value;
};

// Longitudinal observations grouped by subject and covariate.
// obs[i][g] holds (time, value) pairs sorted by time.
struct LongitudinalData {
  std::vector<std::vector<std::vector<std::pair<double, double>>>> obs;
  std::vector<long long> subject_ids;  // original ids, for error messages

  int n() const { return static_cast<int>(obs.size()); }
  int G() const { return obs.empty() ? 0 : static_cast<int>(obs[0].size()); }

  // Groups records, sorts by time, validates that every subject carries
  // observations for every covariate (throws InsufficientData naming the
  // subject otherwise). Covariates in records are 0-based.
  static LongitudinalData from_records(std::span<const ObservationRecord> records, int G);
};

// Trajectories of G functional covariates for n subjects on a shared grid.
// curves[g] is n x |grid|.
struct FunctionalSample {
  Grid grid;
  std::vector<Eigen::MatrixXd> curves;
  bool centered = false;

  int n() const { return curves.empty() ? 0 : static_cast<int>(curves[0].rows()); }
  int G() const { return static_cast<int>(curves.size()); }
  void validate() const;  // throws GridMismatch / InvalidArgument
};

// FPCA eigensystem of one covariate. `values` carries the full clamped
// spectrum; `functions` keeps the leading `m` eigenfunctions on the grid,
// orthonormal under the grid quadrature. `fve` is the cumulative fraction
// of variance explained, one entry per spectrum component.
struct EigenSystem {
  int covariate = 0;
  Eigen::VectorXd values;
  Eigen::MatrixXd functions;  // |grid| x m
  int m = 0;
  Eigen::VectorXd fve;
};

enum class Kernel { epanechnikov, gaussian };

// Truncation rule: fixed component count, or smallest m reaching the FVE
// threshold.
struct Truncation {
  std::optional<int> fixed_m;
  double fve = 0.95;

  static Truncation fixed(int m) { return Truncation{m, 0.0}; }
  static Truncation by_fve(double theta) { return Truncation{std::nullopt, theta}; }
};

struct SmootherConfig {
  std::optional<double> bandwidth;  // explicit h; otherwise the rule below
  double bandwidth_scale = 1.0;     // c in h = c * range(T) * n_obs^(-1/5)
  Kernel kernel = Kernel::epanechnikov;
  Grid eval_grid;

  double resolve_bandwidth(std::size_t n_obs) const;
};

// Local linear smoother of one trajectory onto cfg.eval_grid. Falls back to
// a local constant fit where the local design is singular.
Eigen::VectorXd local_linear_smooth(std::span<const double> times,
                                    std::span<const double> values,
                                    const SmootherConfig& cfg);

// Smooths every (subject, covariate) trajectory; bandwidth is resolved per
// trajectory from its observation count.
FunctionalSample smooth_sample(const LongitudinalData& data, const SmootherConfig& cfg);

// Subtracts the cross-sectional mean curve per covariate. The means are
// returned through `mean_curves` (one |grid| vector per covariate) for
// later un-centering of predictions.
FunctionalSample center_sample(const FunctionalSample& sample,
                               std::vector<Eigen::VectorXd>* mean_curves = nullptr);

// (1/n) X^T X of the centered trajectories of covariate g, |grid| x |grid|.
Eigen::MatrixXd sample_covariance(const FunctionalSample& sample, int g);

// Weighted eigenproblem: eigendecompose W^{1/2} cov W^{1/2} and map the
// eigenvectors back by W^{-1/2} so that eigenfunctions are orthonormal
// under the grid quadrature. Eigenvalues are clamped below at 0.
EigenSystem fpca(const Eigen::MatrixXd& cov, const Grid& grid, const Truncation& trunc);

// Quadrature scores a_ij = sum_t w_t X_i(t) gamma_j(t) of covariate
// es.covariate; returns an n x m block.
Eigen::MatrixXd compute_scores(const FunctionalSample& sample, const EigenSystem& es);

// phi_1 = 1, phi_{2k} = sqrt(2) sin(2 pi k t), phi_{2k+1} = sqrt(2) cos(2 pi k t),
// sampled on the grid; |grid| x m.
Eigen::MatrixXd fourier_basis(int m, const Grid& grid);

}  // namespace ffasm
