#pragma once

#include <map>
#include <string>
#include <vector>

#include "synthctl/panel.hpp"

namespace synthctl {

enum class Method { OLS, PCR, LASSO, ADH, MDD, SPATIAL, BSTS };

std::string to_string(Method m);
/// Case-insensitive; throws InputError on unknown names.
Method parse_method(const std::string& name);

/// Estimator output for the linear model y0t = alpha + w'yt.
struct Fit {
  Method method = Method::OLS;
  double alpha = 0.0;
  Vector weights;                             // length J, panel column order
  std::map<std::string, double> hyperparams;  // lambda, k, matches, zeta, cutoff, ...
  Vector fitted_pre;                          // alpha + Y_pre w
  bool scaled = false;                        // controls standardized before fitting
  int iterations = 0;                         // solver sweeps / iterations, where meaningful
};

struct DistanceInfo {
  Vector a;  // distance from the treated unit to each control
  double cutoff = 0.0;
  double zeta = 1.0;
};

struct LassoOptions {
  int max_sweeps = 10000;
  double tolerance = 1e-7;  // max absolute coefficient change per full sweep
  /// Every this many sweeps, jump to the exact minimizer on the current
  /// support and sign pattern (when that lowers the objective). 0 disables.
  int support_step_every = 5;
  /// When set, receives the objective value after every full sweep.
  std::vector<double>* objective_trace = nullptr;
};

/// Matrix-level Lasso: minimizes (1/n)||y - a - Yw||^2 + lambda ||w||_1 by
/// cyclic coordinate descent on centered data. `warm_start` may be empty.
/// Throws ConvergenceError (best iterate = weights) after max_sweeps.
struct LassoSolution {
  double alpha = 0.0;
  Vector weights;
  int sweeps = 0;
};
LassoSolution lasso_solve(const Matrix& Y, const Vector& y, double lambda,
                          const LassoOptions& options = {}, const Vector& warm_start = {});

/// Value of the Lasso objective at (alpha, w).
double lasso_objective(const Matrix& Y, const Vector& y, double alpha, const Vector& w, double lambda);

/// Matrix-level PCR with alpha = 0: w = V_k (Y_k'Y_k)^{-1} Y_k'y, Y_k = Y V_k.
Vector pcr_solve(const Matrix& Y, const Vector& y, Index k);

/// Columns whose sample variance over the rows of Y is at least the
/// zero-variance threshold.
std::vector<Index> informative_columns(const Matrix& Y);

struct ScalingOptions {
  bool standardize = false;  // divide controls by their pretreatment std before fitting
};

Fit fit_ols(const Panel& panel, bool intercept = true);
Fit fit_pcr(const Panel& panel, Index k, const ScalingOptions& scaling = {});
Fit fit_lasso(const Panel& panel, double lambda, const ScalingOptions& scaling = {},
              const LassoOptions& options = {});
Fit fit_adh(const Panel& panel);
Fit fit_mdd(const Panel& panel, Index matches = 5);
Fit fit_spatial(const Panel& panel, const DistanceInfo& dist);

/// Counterfactual alpha + w'y_h for each post period h.
Vector predict(const Fit& fit, const Panel& panel);

}  // namespace synthctl
