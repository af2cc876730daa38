#pragma once

#include <Eigen/Core>
#include <vector>

namespace ffasm {

// Column range of covariate g inside the stacked score matrix.
struct ScoreBlock {
  int covariate;
  int offset;
  int m;
};

// Stacked score matrix A (n x p, p = sum of block widths) with its block
// map. Columns are mean-centered.
struct ScoreMatrix {
  Eigen::MatrixXd data;
  std::vector<ScoreBlock> blocks;
  bool centered = false;

  int n() const { return static_cast<int>(data.rows()); }
  int p() const { return static_cast<int>(data.cols()); }
  const ScoreBlock& block_of_column(int column) const;
};

// Estimated factor structure A = F B^T + U with F^T F / n = I_K.
struct FactorDecomposition {
  int K = 0;
  Eigen::MatrixXd F;  // n x K
  Eigen::MatrixXd B;  // p x K
  Eigen::MatrixXd U;  // n x p
  Eigen::VectorXd eigenvalues;  // spectrum of A^T A / n, descending
};

struct FactorSelectionConfig {
  int k_max = 0;     // 0: resolve to min(p/2, n/2, 15)
  double c_n = 0.0;  // additive penalty in the ratio criterion

  int resolve_k_max(int n, int p) const;
};

struct FactorSelection {
  int K = 0;
  Eigen::VectorXd eigenvalues;  // of A^T A, descending, as used by the criterion
  Eigen::VectorXd criterion;    // criterion value per candidate k (1-based -> index k-1)
};

// Stacks per-covariate score blocks (ordered by covariate) and centers the
// columns.
ScoreMatrix assemble_scores(const std::vector<Eigen::MatrixXd>& blocks);

// F = sqrt(n) x top-K eigenvectors of A A^T, B = A^T F / n, U = A - F B^T.
// The p x p route is used when p <= n; it is algebraically identical.
// Column signs are fixed so each F column's largest-magnitude entry is
// positive. A must be column-centered.
FactorDecomposition estimate_factors(const Eigen::MatrixXd& A, int K);
FactorDecomposition estimate_factors(const ScoreMatrix& A, int K);

// Eigenvalue-ratio criterion: argmin over 1 <= k <= k_max of
// (lambda_{k+1}(A^T A) + C_n) / (lambda_k(A^T A) + C_n), ties to smallest k.
FactorSelection select_num_factors_ratio(const Eigen::MatrixXd& A,
                                         const FactorSelectionConfig& cfg);
FactorSelection select_num_factors_ratio(const ScoreMatrix& A,
                                         const FactorSelectionConfig& cfg);

enum class InfoCriterion { ic, pc };

// Bai-Ng style criteria over 1 <= k <= k_max with
// V(k) = ||A - F_k B_k^T||_F^2 / (np) and
// g(n,p) = ((n+p)/(np)) log(np/(n+p)):
//   ic: log(V(k)) + k g(n,p)         (V clamped below at 1e-300)
//   pc: V(k) + k V(k_max) g(n,p)
FactorSelection select_num_factors_ic(const Eigen::MatrixXd& A,
                                      const FactorSelectionConfig& cfg,
                                      InfoCriterion which);

}  // namespace ffasm
