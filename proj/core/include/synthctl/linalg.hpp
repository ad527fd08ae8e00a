#pragma once

#include "synthctl/types.hpp"

namespace synthctl {

/// argmin ||y - X b||^2 for a full-column-rank X (n >= p).
/// Throws SingularMatrixError when sigma_min < 1e-10 * sigma_max.
Vector solve_least_squares(const Matrix& X, const Vector& y);

inline constexpr double kRankTolerance = 1e-10;

struct PrincipalComponents {
  Matrix loadings;  // J x k, orthonormal columns
  Matrix scores;    // T0 x k, Y * loadings
  Vector singular_values;
};

/// Leading `k` principal directions of Y (uncentered unless `center`), with
/// each loading's largest-magnitude entry made positive.
PrincipalComponents principal_components(const Matrix& Y, Index k, bool center = false);

struct SimplexOptions {
  int max_iterations = 10000;
  double objective_tolerance = 1e-12;
};

struct SimplexSolution {
  Vector weights;
  double objective = 0.0;  // ||y - Y w||^2
  int iterations = 0;
};

/// argmin ||y - Y w||^2 over the unit simplex {w >= 0, sum w = 1}.
///
/// Primal active-set method on the support (each step solves the
/// equality-constrained subproblem exactly), falling back to accelerated
/// projected gradient when the active set stalls. Throws ConvergenceError
/// carrying the best iterate after `max_iterations`.
SimplexSolution simplex_constrained_ls(const Matrix& Y, const Vector& y,
                                       const SimplexOptions& options = {});

/// Euclidean projection of v onto the unit simplex.
Vector project_to_simplex(const Vector& v);

/// Row-wise sample covariance of `observations` (one observation per row)
/// plus a ridge of `ridge_factor * trace / p` on the diagonal.
Matrix regularized_covariance(const Matrix& observations, double ridge_factor = 1e-8);

/// sqrt((a - b)' cov^{-1} (a - b)). Throws NotPositiveDefiniteError.
double mahalanobis(const Vector& a, const Vector& b, const Matrix& covariance);

/// Reusable Mahalanobis metric: factorize once, measure many.
class MahalanobisMetric {
 public:
  explicit MahalanobisMetric(const Matrix& covariance);
  double distance(const Vector& a, const Vector& b) const;

 private:
  Eigen::LLT<Matrix> llt_;
};

}  // namespace synthctl
