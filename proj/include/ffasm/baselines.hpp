#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "ffasm/model.hpp"
#include "ffasm/penalized.hpp"

namespace ffasm {

// Column groups inside a design matrix, one per covariate. Groups must be
// disjoint and non-empty; columns outside every group are treated as
// ungrouped singletons (e.g. the intercept).
struct GroupStructure {
  std::vector<std::pair<int, int>> groups;  // (first column, width)

  static GroupStructure from_blocks(const ScoreMatrix& scores, int column_offset = 0);
  void validate(int n_columns) const;
};

// Gaussian block coordinate descent with the penalty applied to each group's
// euclidean norm. Blocks move by majorization steps whose curvature is the
// largest eigenvalue of the group's Gram block; ungrouped columns take plain
// least-squares coordinate steps. scale_group_lambda multiplies lambda by
// sqrt(group width).
FitResult fit_penalized_groups(const Eigen::VectorXd& y, const Design& design,
                               const GroupStructure& groups, const PenaltySpec& spec,
                               const FitOptions& opts = {},
                               bool scale_group_lambda = true);

// Baseline: penalized fit on the centered scores with no factor
// augmentation. Intercept unpenalized; reconstruction and selection mirror
// fit_ffasm so metric differences isolate the augmentation step.
FfasmFit fit_mcp_scores(const ScoreBundle& bundle, const Eigen::VectorXd& y,
                        const FfasmConfig& cfg);

// Baseline: group-penalized fit with one group per covariate, so covariates
// enter and leave whole blocks at a time.
FfasmFit fit_group_mcp(const ScoreBundle& bundle, const Eigen::VectorXd& y,
                       const FfasmConfig& cfg, bool scale_group_lambda = true);

}  // namespace ffasm
