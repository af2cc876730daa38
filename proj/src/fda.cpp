#include "ffasm/fda.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "ffasm/errors.hpp"

namespace ffasm {

namespace {

double kernel_eval(Kernel k, double u) {
  switch (k) {
    case Kernel::epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case Kernel::gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  }
  return 0.0;
}

}  // namespace

LongitudinalData LongitudinalData::from_records(std::span<const ObservationRecord> records,
                                                int G) {
  if (G < 1) throw InvalidArgument("LongitudinalData: need G >= 1");
  std::map<long long, std::size_t> row_of;
  LongitudinalData out;
  for (const auto& r : records) {
    if (r.covariate < 0 || r.covariate >= G)
      throw InvalidArgument("LongitudinalData: covariate index " +
                            std::to_string(r.covariate + 1) + " outside [1," +
                            std::to_string(G) + "]");
    auto [it, inserted] = row_of.try_emplace(r.subject, out.obs.size());
    if (inserted) {
      out.obs.emplace_back(static_cast<std::size_t>(G));
      out.subject_ids.push_back(r.subject);
    }
    out.obs[it->second][static_cast<std::size_t>(r.covariate)].emplace_back(r.time, r.value);
  }
  if (out.obs.empty()) throw InsufficientData("LongitudinalData: no records");
  for (std::size_t i = 0; i < out.obs.size(); ++i) {
    for (int g = 0; g < G; ++g) {
      auto& traj = out.obs[i][static_cast<std::size_t>(g)];
      if (traj.size() < 2)
        throw InsufficientData("subject " + std::to_string(out.subject_ids[i]) +
                               " has fewer than 2 observations for covariate " +
                               std::to_string(g + 1));
      std::sort(traj.begin(), traj.end());
    }
  }
  return out;
}

void FunctionalSample::validate() const {
  if (curves.empty()) throw InvalidArgument("FunctionalSample: no covariates");
  const Eigen::Index rows = curves[0].rows();
  for (const auto& c : curves) {
    if (c.cols() != grid.size())
      throw GridMismatch("FunctionalSample: curve columns differ from grid size");
    if (c.rows() != rows)
      throw InvalidArgument("FunctionalSample: covariates carry different subject counts");
    if (!c.allFinite())
      throw InvalidArgument("FunctionalSample: non-finite trajectory value");
  }
}

double SmootherConfig::resolve_bandwidth(std::size_t n_obs) const {
  if (bandwidth) {
    if (*bandwidth <= 0.0) throw InvalidArgument("SmootherConfig: bandwidth must be positive");
    return *bandwidth;
  }
  if (bandwidth_scale <= 0.0)
    throw InvalidArgument("SmootherConfig: bandwidth_scale must be positive");
  const double h =
      bandwidth_scale * eval_grid.range() * std::pow(static_cast<double>(n_obs), -0.2);
  if (h <= 0.0) throw InvalidArgument("SmootherConfig: resolved bandwidth not positive");
  return h;
}

Eigen::VectorXd local_linear_smooth(std::span<const double> times,
                                    std::span<const double> values,
                                    const SmootherConfig& cfg) {
  if (times.size() != values.size())
    throw InvalidArgument("local_linear_smooth: times/values length mismatch");
  if (times.size() < 2)
    throw InsufficientData("local_linear_smooth: need at least 2 observations");
  const double h = cfg.resolve_bandwidth(times.size());

  const Eigen::Index L = cfg.eval_grid.size();
  Eigen::VectorXd out(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const double t = cfg.eval_grid.points[l];
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double d = times[j] - t;
      const double k = kernel_eval(cfg.kernel, d / h);
      if (k == 0.0) continue;
      s0 += k;
      s1 += k * d;
      s2 += k * d * d;
      t0 += k * values[j];
      t1 += k * d * values[j];
    }
    if (s0 <= 0.0)
      throw BandwidthTooSmall("local_linear_smooth: empty kernel window at t = " +
                              std::to_string(t));
    const double det = s0 * s2 - s1 * s1;
    if (det > 1e-12 * s0 * s2) {
      out[l] = (s2 * t0 - s1 * t1) / det;
    } else {
      // Singular local design (e.g. a single support point): local constant.
      out[l] = t0 / s0;
    }
  }
  return out;
}

FunctionalSample smooth_sample(const LongitudinalData& data, const SmootherConfig& cfg) {
  const int n = data.n();
  const int G = data.G();
  if (n == 0 || G == 0) throw InsufficientData("smooth_sample: empty data");
  FunctionalSample s;
  s.grid = cfg.eval_grid;
  s.curves.assign(static_cast<std::size_t>(G),
                  Eigen::MatrixXd(n, cfg.eval_grid.size()));
  std::vector<double> t, v;
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < G; ++g) {
      const auto& traj = data.obs[static_cast<std::size_t>(i)][static_cast<std::size_t>(g)];
      t.resize(traj.size());
      v.resize(traj.size());
      for (std::size_t j = 0; j < traj.size(); ++j) {
        t[j] = traj[j].first;
        v[j] = traj[j].second;
      }
      s.curves[static_cast<std::size_t>(g)].row(i) = local_linear_smooth(t, v, cfg).transpose();
    }
  }
  return s;
}

FunctionalSample center_sample(const FunctionalSample& sample,
                               std::vector<Eigen::VectorXd>* mean_curves) {
  sample.validate();
  FunctionalSample out;
  out.grid = sample.grid;
  out.centered = true;
  out.curves.reserve(sample.curves.size());
  if (mean_curves) mean_curves->clear();
  for (const auto& c : sample.curves) {
    Eigen::VectorXd mean = c.colwise().mean();
    out.curves.push_back(c.rowwise() - mean.transpose());
    if (mean_curves) mean_curves->push_back(std::move(mean));
  }
  return out;
}

Eigen::MatrixXd sample_covariance(const FunctionalSample& sample, int g) {
  sample.validate();
  if (g < 0 || g >= sample.G())
    throw InvalidArgument("sample_covariance: covariate index out of range");
  const auto& X = sample.curves[static_cast<std::size_t>(g)];
  if (X.rows() < 2) throw InsufficientData("sample_covariance: need n >= 2");
  return (X.transpose() * X) / static_cast<double>(X.rows());
}

EigenSystem fpca(const Eigen::MatrixXd& cov, const Grid& grid, const Truncation& trunc) {
  const Eigen::Index L = grid.size();
  if (cov.rows() != L || cov.cols() != L)
    throw GridMismatch("fpca: covariance size differs from grid size");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidCovariance("fpca: covariance not symmetric within 1e-8");
  if ((grid.weights.array() <= 0.0).any())
    throw InvalidArgument("fpca: grid weights must be positive");

  const Eigen::VectorXd wsqrt = grid.weights.array().sqrt();
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const Eigen::MatrixXd M =
      wsqrt.asDiagonal() * sym * wsqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
  if (solver.info() != Eigen::Success) throw NumericalError("fpca: eigensolver failed");

  // Eigen returns ascending order; flip to descending and clamp at 0.
  EigenSystem es;
  es.values = solver.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vecs = solver.eigenvectors().rowwise().reverse();

  const double total = es.values.sum();
  es.fve.resize(es.values.size());
  double cum = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    cum += es.values[k];
    es.fve[k] = total > 0.0 ? cum / total : 1.0;
  }

  int m;
  if (trunc.fixed_m) {
    m = *trunc.fixed_m;
    if (m < 1 || m > L) throw InvalidArgument("fpca: fixed truncation out of range");
  } else {
    if (!(trunc.fve > 0.0 && trunc.fve <= 1.0))
      throw InvalidArgument("fpca: FVE threshold must lie in (0,1]");
    m = 1;
    while (m < L && es.fve[m - 1] < trunc.fve - 1e-15) ++m;
  }

  es.m = m;
  es.functions = vecs.leftCols(m).array().colwise() / wsqrt.array();
  // Sign convention: the entry of largest magnitude is positive.
  for (int j = 0; j < m; ++j) {
    Eigen::Index at = 0;
    es.functions.col(j).cwiseAbs().maxCoeff(&at);
    if (es.functions(at, j) < 0.0) es.functions.col(j) = -es.functions.col(j);
  }
  return es;
}

Eigen::MatrixXd compute_scores(const FunctionalSample& sample, const EigenSystem& es) {
  sample.validate();
  if (es.covariate < 0 || es.covariate >= sample.G())
    throw InvalidArgument("compute_scores: covariate index out of range");
  if (es.functions.rows() != sample.grid.size())
    throw GridMismatch("compute_scores: eigenfunctions on a different grid");
  const auto& X = sample.curves[static_cast<std::size_t>(es.covariate)];
  return X * (sample.grid.weights.asDiagonal() * es.functions);
}

Eigen::MatrixXd fourier_basis(int m, const Grid& grid) {
  if (m < 1) throw InvalidArgument("fourier_basis: m must be at least 1");
  const Eigen::Index L = grid.size();
  Eigen::MatrixXd phi(L, m);
  phi.col(0).setOnes();
  const double sqrt2 = std::numbers::sqrt2;
  for (int j = 2; j <= m; ++j) {
    const int k = j / 2;
    const double freq = 2.0 * std::numbers::pi * k;
    for (Eigen::Index l = 0; l < L; ++l) {
      const double t = grid.points[l];
      phi(l, j - 1) = (j % 2 == 0) ? sqrt2 * std::sin(freq * t) : sqrt2 * std::cos(freq * t);
    }
  }
  return phi;
}

}  // namespace ffasm
