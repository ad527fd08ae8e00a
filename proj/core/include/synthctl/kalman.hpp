#pragma once

#include <vector>

#include "synthctl/random.hpp"
#include "synthctl/types.hpp"

namespace synthctl {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Local linear trend with a regression constant. State x_t = (level, slope, 1),
///   y_t = Z_t x_t + e_t,        Z_t = [1, 0, regression_t],  e_t ~ N(0, obs_var)
///   x_{t+1} = T x_t + R eta_t,  eta_t ~ N(0, diag(level_var, slope_var))
/// so regression_t = w'y_t enters through the constant third state.
struct StateSpaceModel {
  Vector regression;  // w'y_t per period; zeros for a pure trend model
  double obs_var = 1.0;
  double level_var = 0.0;
  double slope_var = 0.0;
  Vector3 initial_mean = Vector3(0.0, 0.0, 1.0);
  Matrix3 initial_cov = Matrix3::Zero();

  static Matrix3 transition();
  /// R Q R'.
  Matrix3 state_noise() const;
  Eigen::RowVector3d design(Index t) const { return {1.0, 0.0, regression(t)}; }

  /// Diffuse start: mean (first_obs, 0, 1), variance `diffuse` on level and slope.
  static StateSpaceModel local_linear_trend(Vector regression, double obs_var, double level_var,
                                            double slope_var, double first_obs, double diffuse = 1e6);
};

struct FilterResult {
  std::vector<Vector3> predicted_mean;  // a_t = E[x_t | y_1..y_{t-1}]
  std::vector<Matrix3> predicted_cov;   // P_t
  std::vector<Vector3> filtered_mean;   // E[x_t | y_1..y_t]
  std::vector<Matrix3> filtered_cov;
  std::vector<Vector3> gain;            // K_t = T P_t Z_t' / F_t
  Vector innovation;                    // v_t
  Vector innovation_var;                // F_t
  double loglik = 0.0;
};

struct SmootherResult {
  std::vector<Vector3> mean;
  std::vector<Matrix3> cov;
};

/// Forward recursion. Throws InputError on non-finite data and
/// NumericalError when an innovation variance is not positive.
FilterResult kalman_filter(const StateSpaceModel& model, const Vector& y);

/// Backward state smoothing via the (r_t, N_t) recursion.
SmootherResult kalman_smoother(const StateSpaceModel& model, const FilterResult& filter);

/// Smoothed means only, skipping the covariance recursion.
std::vector<Vector3> smoothed_means(const StateSpaceModel& model, const FilterResult& filter);

/// One draw of the state path given y (simulate, smooth, correct).
/// Returns n x 3, one row per period.
Matrix simulation_smoother(const StateSpaceModel& model, const Vector& y, RngStream& rng);

}  // namespace synthctl
