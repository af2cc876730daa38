#include "ffasm/grid.hpp"

#include "ffasm/errors.hpp"

namespace ffasm {

Grid Grid::uniform(double lo, double hi, int n) {
  if (n < 2) throw InvalidArgument("Grid::uniform: need at least 2 points");
  if (!(hi > lo)) throw InvalidArgument("Grid::uniform: hi must exceed lo");
  Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(n, lo, hi);
  return from_points(std::move(pts));
}

Grid Grid::from_points(Eigen::VectorXd pts) {
  const Eigen::Index n = pts.size();
  if (n < 2) throw InvalidArgument("Grid: need at least 2 points");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(pts[i] > pts[i - 1]))
      throw InvalidArgument("Grid: points must be strictly increasing");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double h = pts[i + 1] - pts[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return Grid{std::move(pts), std::move(w)};
}

double Grid::integrate(const Eigen::VectorXd& f) const {
  if (f.size() != points.size())
    throw GridMismatch("Grid::integrate: value length differs from grid size");
  return weights.dot(f);
}

}  // namespace ffasm
