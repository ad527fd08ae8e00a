#include "synthctl/kalman.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace synthctl {

Matrix3 StateSpaceModel::transition() {
  Matrix3 T;
  T << 1.0, 1.0, 0.0,
       0.0, 1.0, 0.0,
       0.0, 0.0, 1.0;
  return T;
}

Matrix3 StateSpaceModel::state_noise() const {
  Matrix3 q = Matrix3::Zero();
  q(0, 0) = level_var;
  q(1, 1) = slope_var;
  return q;
}

StateSpaceModel StateSpaceModel::local_linear_trend(Vector regression, double obs_var, double level_var,
                                                    double slope_var, double first_obs, double diffuse) {
  StateSpaceModel m;
  m.regression = std::move(regression);
  m.obs_var = obs_var;
  m.level_var = level_var;
  m.slope_var = slope_var;
  m.initial_mean = Vector3(first_obs, 0.0, 1.0);
  m.initial_cov = Matrix3::Zero();
  m.initial_cov(0, 0) = diffuse;
  m.initial_cov(1, 1) = diffuse;
  return m;
}

namespace {

void check_model(const StateSpaceModel& model, const Vector& y) {
  if (model.regression.size() != y.size())
    throw InputError("state space: regression term has " + std::to_string(model.regression.size()) +
                     " periods, data has " + std::to_string(y.size()));
  if (!y.allFinite() || !model.regression.allFinite()) throw InputError("state space: non-finite input");
  if (!(model.obs_var > 0.0) || !std::isfinite(model.obs_var))
    throw InputError("state space: observation variance must be positive");
  if (!(model.level_var >= 0.0) || !(model.slope_var >= 0.0))
    throw InputError("state space: state variances must be nonnegative");
}

}  // namespace

FilterResult kalman_filter(const StateSpaceModel& model, const Vector& y) {
  check_model(model, y);
  const Index n = y.size();
  const Matrix3 T = StateSpaceModel::transition();
  const Matrix3 RQR = model.state_noise();
  FilterResult out;
  out.predicted_mean.resize(static_cast<std::size_t>(n));
  out.predicted_cov.resize(static_cast<std::size_t>(n));
  out.filtered_mean.resize(static_cast<std::size_t>(n));
  out.filtered_cov.resize(static_cast<std::size_t>(n));
  out.gain.resize(static_cast<std::size_t>(n));
  out.innovation.resize(n);
  out.innovation_var.resize(n);

  Vector3 a = model.initial_mean;
  Matrix3 P = model.initial_cov;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double loglik = 0.0;
  for (Index t = 0; t < n; ++t) {
    const auto s = static_cast<std::size_t>(t);
    out.predicted_mean[s] = a;
    out.predicted_cov[s] = P;
    const Eigen::RowVector3d Z = model.design(t);
    const Vector3 PZ = P * Z.transpose();
    const double v = y(t) - Z.dot(a);
    const double F = Z.dot(PZ) + model.obs_var;
    if (!(F > 0.0) || !std::isfinite(F))
      throw NumericalError("kalman filter: innovation variance collapsed at t=" + std::to_string(t + 1));
    out.innovation(t) = v;
    out.innovation_var(t) = F;
    loglik -= 0.5 * (log2pi + std::log(F) + v * v / F);

    out.filtered_mean[s] = a + PZ * (v / F);
    Matrix3 Pf = P - PZ * PZ.transpose() / F;
    Pf = 0.5 * (Pf + Pf.transpose());
    out.filtered_cov[s] = Pf;

    const Vector3 K = T * PZ / F;
    out.gain[s] = K;
    const Matrix3 L = T - K * Z;
    a = T * a + K * v;
    P = T * P * L.transpose() + RQR;
    P = 0.5 * (P + P.transpose());
  }
  out.loglik = loglik;
  return out;
}

namespace {

template <bool WithCov>
void backward(const StateSpaceModel& model, const FilterResult& f, std::vector<Vector3>& mean,
              std::vector<Matrix3>* cov) {
  const auto n = static_cast<Index>(f.innovation.size());
  const Matrix3 T = StateSpaceModel::transition();
  mean.resize(static_cast<std::size_t>(n));
  if constexpr (WithCov) cov->resize(static_cast<std::size_t>(n));
  Vector3 r = Vector3::Zero();
  Matrix3 N = Matrix3::Zero();
  for (Index t = n - 1; t >= 0; --t) {
    const auto s = static_cast<std::size_t>(t);
    const Eigen::RowVector3d Z = model.design(t);
    const double F = f.innovation_var(t);
    const Matrix3 L = T - f.gain[s] * Z;
    r = Z.transpose() * (f.innovation(t) / F) + L.transpose() * r;
    const Matrix3& P = f.predicted_cov[s];
    mean[s] = f.predicted_mean[s] + P * r;
    if constexpr (WithCov) {
      N = Z.transpose() * Z / F + L.transpose() * N * L;
      Matrix3 V = P - P * N * P;
      (*cov)[s] = 0.5 * (V + V.transpose());
    }
  }
}

}  // namespace

SmootherResult kalman_smoother(const StateSpaceModel& model, const FilterResult& filter) {
  SmootherResult out;
  backward<true>(model, filter, out.mean, &out.cov);
  return out;
}

std::vector<Vector3> smoothed_means(const StateSpaceModel& model, const FilterResult& filter) {
  std::vector<Vector3> mean;
  backward<false>(model, filter, mean, nullptr);
  return mean;
}

Matrix simulation_smoother(const StateSpaceModel& model, const Vector& y, RngStream& rng) {
  check_model(model, y);
  const Index n = y.size();
  const Matrix3 T = StateSpaceModel::transition();

  // Unconditional draw (x*, y*) from the model.
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(model.initial_cov);
  const Matrix3 root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Vector3 x = model.initial_mean + root * Vector3(rng.normal(), rng.normal(), rng.normal());
  Matrix xs(n, 3);
  Vector ys(n);
  const double sd_obs = std::sqrt(model.obs_var);
  const double sd_level = std::sqrt(model.level_var);
  const double sd_slope = std::sqrt(model.slope_var);
  for (Index t = 0; t < n; ++t) {
    xs.row(t) = x.transpose();
    ys(t) = model.design(t).dot(x) + sd_obs * rng.normal();
    const double e1 = rng.normal();
    const double e2 = rng.normal();
    x = T * x;
    x(0) += sd_level * e1;
    x(1) += sd_slope * e2;
  }

  const auto hat = smoothed_means(model, kalman_filter(model, y));
  const auto hat_star = smoothed_means(model, kalman_filter(model, ys));
  Matrix path(n, 3);
  for (Index t = 0; t < n; ++t) {
    const auto s = static_cast<std::size_t>(t);
    path.row(t) = xs.row(t) - hat_star[s].transpose() + hat[s].transpose();
  }
  // The constant component is exactly one by construction.
  path.col(2).setOnes();
  return path;
}

}  // namespace synthctl
