#include "ffasm/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "ffasm/errors.hpp"

namespace ffasm {

Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw InvalidArgument("procrustes_rotation: shape mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X.transpose() * Y,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

double procrustes_distance2(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  const Eigen::MatrixXd R = procrustes_rotation(X, Y);
  return (X * R - Y).squaredNorm();
}

double max_principal_angle(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != Y.rows())
    throw InvalidArgument("max_principal_angle: row mismatch");
  Eigen::HouseholderQR<Eigen::MatrixXd> qx(X), qy(Y);
  const Eigen::MatrixXd Qx =
      qx.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
  const Eigen::MatrixXd Qy =
      qy.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qx.transpose() * Qy);
  const double c = std::min(1.0, svd.singularValues().minCoeff());
  return std::acos(c);
}

Eigen::MatrixXd residualize(const Eigen::MatrixXd& F, const Eigen::MatrixXd& M) {
  if (F.cols() == 0) return M;
  if (F.rows() != M.rows())
    throw InvalidArgument("residualize: row mismatch");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(F);
  return M - F * cod.solve(M);
}

}  // namespace ffasm
