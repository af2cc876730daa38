#include "ffasm/factor.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "ffasm/errors.hpp"

namespace ffasm {

namespace {

// Descending eigenvalues of A^T A (equivalently A A^T plus zero padding),
// computed on the cheaper Gram side.
Eigen::VectorXd gram_spectrum(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows(), p = A.cols();
  Eigen::MatrixXd gram;
  if (p <= n)
    gram = A.transpose() * A;
  else
    gram = A * A.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success)
    throw NumericalError("gram_spectrum: eigensolver failed");
  return solver.eigenvalues().reverse().cwiseMax(0.0);
}

void fix_column_signs(Eigen::MatrixXd& F) {
  for (Eigen::Index j = 0; j < F.cols(); ++j) {
    Eigen::Index at = 0;
    F.col(j).cwiseAbs().maxCoeff(&at);
    if (F(at, j) < 0.0) F.col(j) = -F.col(j);
  }
}

FactorDecomposition decompose(const Eigen::MatrixXd& A, int K) {
  const Eigen::Index n = A.rows(), p = A.cols();
  if (K < 1 || K > std::min(n, p))
    throw InvalidArgument("estimate_factors: K must lie in [1, min(n,p)]");

  FactorDecomposition out;
  out.K = K;

  bool via_p = p <= n;
  Eigen::MatrixXd F;
  if (via_p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A.transpose() * A);
    if (solver.info() != Eigen::Success)
      throw NumericalError("estimate_factors: eigensolver failed");
    const Eigen::VectorXd vals = solver.eigenvalues().reverse();
    const double scale = std::max(vals[0], 0.0);
    if (vals[K - 1] > 1e-14 * std::max(scale, 1.0)) {
      // F = sqrt(n) A V_K diag(mu_k^{-1/2}) maps the right singular vectors
      // to the left ones.
      Eigen::MatrixXd V = solver.eigenvectors().rowwise().reverse().leftCols(K);
      F = std::sqrt(static_cast<double>(n)) * A * V *
          vals.head(K).cwiseMax(0.0).cwiseSqrt().cwiseInverse().asDiagonal();
      out.eigenvalues = vals.cwiseMax(0.0) / static_cast<double>(n);
    } else {
      // Zero eigenvalue inside the top K: the mapping through A breaks down,
      // but eigenvectors of A A^T stay orthonormal. Use the n x n route.
      via_p = false;
    }
  }
  if (!via_p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A * A.transpose());
    if (solver.info() != Eigen::Success)
      throw NumericalError("estimate_factors: eigensolver failed");
    F = std::sqrt(static_cast<double>(n)) *
        solver.eigenvectors().rowwise().reverse().leftCols(K);
    Eigen::VectorXd vals = solver.eigenvalues().reverse().cwiseMax(0.0);
    out.eigenvalues = vals / static_cast<double>(n);
  }

  fix_column_signs(F);
  out.F = std::move(F);
  out.B = A.transpose() * out.F / static_cast<double>(n);
  out.U = A - out.F * out.B.transpose();
  return out;
}

}  // namespace

const ScoreBlock& ScoreMatrix::block_of_column(int column) const {
  for (const auto& b : blocks) {
    if (column >= b.offset && column < b.offset + b.m) return b;
  }
  throw InvalidArgument("ScoreMatrix: column " + std::to_string(column) +
                        " outside every block");
}

int FactorSelectionConfig::resolve_k_max(int n, int p) const {
  int k = k_max > 0 ? k_max : std::min({p / 2, n / 2, 15});
  k = std::min(k, std::min(n, p) - 1);
  if (k < 1) throw InvalidArgument("FactorSelectionConfig: k_max resolves below 1");
  return k;
}

ScoreMatrix assemble_scores(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw InvalidArgument("assemble_scores: no blocks");
  const Eigen::Index n = blocks[0].rows();
  Eigen::Index p = 0;
  for (const auto& b : blocks) {
    if (b.rows() != n)
      throw ShapeMismatch("assemble_scores: blocks carry different subject counts");
    if (b.cols() < 1) throw InvalidArgument("assemble_scores: empty block");
    p += b.cols();
  }
  ScoreMatrix out;
  out.data.resize(n, p);
  int offset = 0;
  for (std::size_t g = 0; g < blocks.size(); ++g) {
    const auto& b = blocks[g];
    out.data.middleCols(offset, b.cols()) = b;
    out.blocks.push_back({static_cast<int>(g), offset, static_cast<int>(b.cols())});
    offset += static_cast<int>(b.cols());
  }
  out.data.rowwise() -= out.data.colwise().mean();
  out.centered = true;
  return out;
}

FactorDecomposition estimate_factors(const Eigen::MatrixXd& A, int K) {
  return decompose(A, K);
}

FactorDecomposition estimate_factors(const ScoreMatrix& A, int K) {
  return decompose(A.data, K);
}

FactorSelection select_num_factors_ratio(const Eigen::MatrixXd& A,
                                         const FactorSelectionConfig& cfg) {
  const int k_max = cfg.resolve_k_max(static_cast<int>(A.rows()),
                                      static_cast<int>(A.cols()));
  if (cfg.c_n < 0.0) throw InvalidArgument("select_num_factors_ratio: C_n must be >= 0");
  const Eigen::VectorXd vals = gram_spectrum(A);
  if (vals[0] <= 0.0)
    throw DegenerateSpectrum("select_num_factors_ratio: leading eigenvalue is zero");

  FactorSelection sel;
  sel.eigenvalues = vals;
  sel.criterion.resize(k_max);
  int best = 1;
  for (int k = 1; k <= k_max; ++k) {
    const double num = vals[k] + cfg.c_n;
    const double den = vals[k - 1] + cfg.c_n;
    // Both terms vanish only past the rank of A; such k never competes.
    const double ratio = den > 0.0 ? num / den : 1.0;
    sel.criterion[k - 1] = ratio;
    if (ratio < sel.criterion[best - 1]) best = k;
  }
  sel.K = best;
  return sel;
}

FactorSelection select_num_factors_ratio(const ScoreMatrix& A,
                                         const FactorSelectionConfig& cfg) {
  return select_num_factors_ratio(A.data, cfg);
}

FactorSelection select_num_factors_ic(const Eigen::MatrixXd& A,
                                      const FactorSelectionConfig& cfg,
                                      InfoCriterion which) {
  const int n = static_cast<int>(A.rows());
  const int p = static_cast<int>(A.cols());
  const int k_max = cfg.resolve_k_max(n, p);
  const Eigen::VectorXd vals = gram_spectrum(A);
  if (vals[0] <= 0.0)
    throw DegenerateSpectrum("select_num_factors_ic: leading eigenvalue is zero");

  const double np = static_cast<double>(n) * p;
  const double g = ((n + p) / np) * std::log(np / (n + p));
  const double total = vals.sum();

  // V(k) = sum of trailing eigenvalues / (np): the Frobenius residual of the
  // best rank-k approximation.
  auto V = [&](int k) {
    double v = (total - vals.head(k).sum()) / np;
    return std::max(v, 0.0);
  };
  const double v_ref = V(k_max);

  FactorSelection sel;
  sel.eigenvalues = vals;
  sel.criterion.resize(k_max);
  int best = 1;
  for (int k = 1; k <= k_max; ++k) {
    double crit;
    if (which == InfoCriterion::ic)
      crit = std::log(std::max(V(k), 1e-300)) + k * g;
    else
      crit = V(k) + k * v_ref * g;
    sel.criterion[k - 1] = crit;
    if (crit < sel.criterion[best - 1]) best = k;
  }
  sel.K = best;
  return sel;
}

}  // namespace ffasm
