#pragma once

#include <Eigen/Core>

namespace ffasm {

// Evaluation grid with trapezoid quadrature weights. Points are strictly
// increasing; weights satisfy sum(weights) == t_max - t_min.
struct Grid {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;

  static Grid uniform(double lo, double hi, int n);
  static Grid from_points(Eigen::VectorXd pts);

  Eigen::Index size() const { return points.size(); }
  double range() const { return points[points.size() - 1] - points[0]; }

  // Quadrature of a function sampled on the grid.
  double integrate(const Eigen::VectorXd& f) const;
};

}  // namespace ffasm
