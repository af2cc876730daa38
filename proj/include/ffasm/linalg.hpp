#pragma once

#include <Eigen/Core>

namespace ffasm {

// Orthogonal matrix R minimizing ||X R - Y||_F (Procrustes). X and Y must
// have the same shape. Used to compare factor or score estimates that are
// identified only up to rotation and sign.
Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

// min_R ||X R - Y||_F^2 over orthogonal R.
double procrustes_distance2(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

// Largest principal angle (radians) between the column spans of X and Y.
double max_principal_angle(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

// Residualizes the columns of M on the column span of F via least squares,
// i.e. M - F (F^T F)^+ F^T M. Rank-deficient F is handled by a pseudoinverse.
Eigen::MatrixXd residualize(const Eigen::MatrixXd& F, const Eigen::MatrixXd& M);

}  // namespace ffasm
