#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "ffasm/grid.hpp"

namespace ffasm {

// Sum over covariates of the quadrature of (estimate - truth)^2.
double imse(const std::vector<Eigen::VectorXd>& estimated,
            const std::vector<Eigen::VectorXd>& truth, const Grid& grid);

// |selected ∩ truth| / |truth|. Truth must be non-empty.
double tpr(const std::vector<int>& selected, const std::vector<int>& truth);

enum class SelectionRule { type1_atleast3, type2_atleast1, all_type1, all_type2 };

// Whether one replication's selected set satisfies the rule against the
// type-1 (strong) and type-2 (weak) truth sets.
bool selection_rule_met(SelectionRule rule, const std::vector<int>& selected,
                        const std::vector<int>& type1, const std::vector<int>& type2);

// Fraction of replications whose selected set satisfies the rule.
double selection_frequency(SelectionRule rule,
                           const std::vector<std::vector<int>>& selected_sets,
                           const std::vector<int>& type1, const std::vector<int>& type2);

// 1 - SSE/SST with SST centered at the training mean. Returns nullopt when
// SST is zero (degenerate test response), so callers can exclude the value.
std::optional<double> out_of_sample_r2(const Eigen::VectorXd& y_test,
                                       const Eigen::VectorXd& y_pred,
                                       double y_train_mean);

}  // namespace ffasm
