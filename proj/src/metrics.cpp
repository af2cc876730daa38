#include "ffasm/metrics.hpp"

#include <algorithm>

#include "ffasm/errors.hpp"

namespace ffasm {

namespace {

int count_hits(const std::vector<int>& selected, const std::vector<int>& truth) {
  int hits = 0;
  for (int t : truth)
    if (std::find(selected.begin(), selected.end(), t) != selected.end()) ++hits;
  return hits;
}

}  // namespace

double imse(const std::vector<Eigen::VectorXd>& estimated,
            const std::vector<Eigen::VectorXd>& truth, const Grid& grid) {
  if (estimated.size() != truth.size())
    throw GridMismatch("imse: estimate and truth covariate counts differ");
  double total = 0.0;
  for (std::size_t g = 0; g < truth.size(); ++g) {
    if (estimated[g].size() != grid.size() || truth[g].size() != grid.size())
      throw GridMismatch("imse: curve not on the evaluation grid");
    const Eigen::VectorXd diff = estimated[g] - truth[g];
    total += grid.weights.dot(diff.cwiseAbs2());
  }
  return total;
}

double tpr(const std::vector<int>& selected, const std::vector<int>& truth) {
  if (truth.empty()) throw InvalidArgument("tpr: empty truth set");
  return static_cast<double>(count_hits(selected, truth)) /
         static_cast<double>(truth.size());
}

bool selection_rule_met(SelectionRule rule, const std::vector<int>& selected,
                        const std::vector<int>& type1, const std::vector<int>& type2) {
  switch (rule) {
    case SelectionRule::type1_atleast3:
      return count_hits(selected, type1) >= 3;
    case SelectionRule::type2_atleast1:
      return count_hits(selected, type2) >= 1;
    case SelectionRule::all_type1:
      return count_hits(selected, type1) == static_cast<int>(type1.size());
    case SelectionRule::all_type2:
      return count_hits(selected, type2) == static_cast<int>(type2.size());
  }
  return false;
}

double selection_frequency(SelectionRule rule,
                           const std::vector<std::vector<int>>& selected_sets,
                           const std::vector<int>& type1, const std::vector<int>& type2) {
  if (selected_sets.empty()) throw InvalidArgument("selection_frequency: no replications");
  int met = 0;
  for (const auto& s : selected_sets)
    if (selection_rule_met(rule, s, type1, type2)) ++met;
  return static_cast<double>(met) / static_cast<double>(selected_sets.size());
}

std::optional<double> out_of_sample_r2(const Eigen::VectorXd& y_test,
                                       const Eigen::VectorXd& y_pred,
                                       double y_train_mean) {
  if (y_test.size() != y_pred.size())
    throw InvalidArgument("out_of_sample_r2: length mismatch");
  if (y_test.size() == 0) throw InvalidArgument("out_of_sample_r2: empty test set");
  const double sse = (y_test - y_pred).squaredNorm();
  const double sst = (y_test.array() - y_train_mean).matrix().squaredNorm();
  if (sst == 0.0) return std::nullopt;
  return 1.0 - sse / sst;
}

}  // namespace ffasm
