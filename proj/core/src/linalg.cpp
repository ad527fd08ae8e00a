#include "synthctl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace synthctl {

Vector solve_least_squares(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw InputError("least squares: X and y row counts differ");
  if (X.rows() < X.cols())
    throw InputError("least squares: need at least as many rows as columns (n=" +
                     std::to_string(X.rows()) + ", p=" + std::to_string(X.cols()) + ")");
  if (X.cols() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(s.size() - 1) < kRankTolerance * s(0))
    throw SingularMatrixError("least squares: design is rank deficient (sigma_min/sigma_max = " +
                              std::to_string(s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0) + ")");
  return svd.matrixV() * (s.cwiseInverse().asDiagonal() * (svd.matrixU().transpose() * y));
}

PrincipalComponents principal_components(const Matrix& Y, Index k, bool center) {
  const Index max_k = std::min(Y.rows(), Y.cols());
  if (k < 1 || k > max_k)
    throw InputError("principal components: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(max_k) + "]");
  Matrix data = Y;
  if (center) data.rowwise() -= data.colwise().mean();
  Eigen::BDCSVD<Matrix> svd(data, Eigen::ComputeThinV);
  PrincipalComponents pc;
  pc.loadings = svd.matrixV().leftCols(k);
  for (Index c = 0; c < k; ++c) {
    Index arg = 0;
    pc.loadings.col(c).cwiseAbs().maxCoeff(&arg);
    if (pc.loadings(arg, c) < 0.0) pc.loadings.col(c) *= -1.0;
  }
  pc.scores = data * pc.loadings;
  pc.singular_values = svd.singularValues().head(k);
  return pc;
}

Vector project_to_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index i = 0; i < n; ++i) {
    cumulative += u[static_cast<std::size_t>(i)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

namespace {

struct SimplexProblem {
  Matrix gram;     // Y'Y
  Vector cross;    // Y'y
  double yy = 0.0;

  double objective(const Vector& w) const {
    return std::max(0.0, w.dot(gram * w) - 2.0 * cross.dot(w) + yy);
  }
  Vector gradient(const Vector& w) const { return 2.0 * (gram * w - cross); }
};

// Equality-constrained minimizer on `free`: min z'Hz - 2b'z s.t. 1'z = 1.
// Solved as a step from the current point so that a singular H_F yields the
// minimizer closest to w.
Vector solve_on_support(const SimplexProblem& p, const std::vector<Index>& free, const Vector& w) {
  const auto m = static_cast<Index>(free.size());
  Matrix kkt = Matrix::Zero(m + 1, m + 1);
  Vector rhs(m + 1);
  Vector wf(m);
  for (Index a = 0; a < m; ++a) wf(a) = w(free[static_cast<std::size_t>(a)]);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b)
      kkt(a, b) = 2.0 * p.gram(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    kkt(a, m) = 1.0;
    kkt(m, a) = 1.0;
  }
  // Gradient at w restricted to the support.
  Vector g(m);
  for (Index a = 0; a < m; ++a) {
    const Index i = free[static_cast<std::size_t>(a)];
    g(a) = 2.0 * (p.gram.row(i).dot(w) - p.cross(i));
  }
  rhs.head(m) = -g;
  rhs(m) = 1.0 - wf.sum();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
  const Vector step = cod.solve(rhs);
  return wf + step.head(m);
}

struct ProjectedGradientResult {
  Vector w;
  int iterations = 0;
};

ProjectedGradientResult projected_gradient(const SimplexProblem& p, Vector w, double lipschitz,
                                           int budget, double tol) {
  ProjectedGradientResult out;
  const double step = 1.0 / lipschitz;
  Vector x = w;
  Vector v = w;
  double t = 1.0;
  double fx = p.objective(x);
  int stalls = 0;
  while (out.iterations < budget) {
    ++out.iterations;
    Vector next = project_to_simplex(v - step * p.gradient(v));
    double fn = p.objective(next);
    if (fn > fx) {
      // Momentum overshoot: restart from x.
      t = 1.0;
      v = x;
      next = project_to_simplex(x - step * p.gradient(x));
      fn = p.objective(next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = next + ((t - 1.0) / t_next) * (next - x);
    t = t_next;
    const double change = std::abs(fx - fn);
    x = std::move(next);
    fx = fn;
    if (change <= tol * std::max(1.0, fx)) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
  }
  out.w = std::move(x);
  return out;
}

// Common support gradient minus every off-support gradient; <= 0 means optimal.
double kkt_violation(const Vector& g, const Vector& w, Index& entering) {
  double support_min = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) > 0.0) support_min = std::min(support_min, g(i));
  double worst = 0.0;
  entering = -1;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) continue;
    const double gap = support_min - g(i);
    if (gap > worst) {
      worst = gap;
      entering = i;
    }
  }
  return worst;
}

Vector finalize(Vector w) {
  w = w.cwiseMax(0.0);
  const double s = w.sum();
  if (s > 0.0) w /= s;
  return w;
}

}  // namespace

SimplexSolution simplex_constrained_ls(const Matrix& Y, const Vector& y, const SimplexOptions& options) {
  if (Y.rows() != y.size()) throw InputError("simplex LS: Y and y row counts differ");
  if (Y.rows() < 1 || Y.cols() < 1) throw InputError("simplex LS: empty problem");
  const Index J = Y.cols();

  SimplexProblem p;
  p.gram = Y.transpose() * Y;
  p.cross = Y.transpose() * y;
  p.yy = y.squaredNorm();
  const double grad_scale = std::max(1.0, 2.0 * (p.gram.cwiseAbs().maxCoeff() + p.cross.cwiseAbs().maxCoeff()));
  const double kkt_tol = 1e-11 * grad_scale;

  // Start at the best single vertex.
  Index start = 0;
  double best_vertex = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < J; ++j) {
    const double f = p.gram(j, j) - 2.0 * p.cross(j) + p.yy;
    if (f < best_vertex) {
      best_vertex = f;
      start = j;
    }
  }
  Vector w = Vector::Zero(J);
  w(start) = 1.0;
  std::vector<Index> free{start};

  SimplexSolution out;
  int iterations = 0;
  int active_set_budget = static_cast<int>(3 * J + 50);
  bool used_fallback = false;

  auto run_active_set = [&](int budget) -> bool {
    Index last_added = -1;
    int steps = 0;
    while (steps < budget && iterations < options.max_iterations) {
      ++steps;
      ++iterations;
      const Vector z = solve_on_support(p, free, w);
      bool interior = true;
      for (Index a = 0; a < z.size(); ++a)
        if (!(z(a) > 0.0)) interior = false;
      if (interior) {
        w.setZero();
        for (std::size_t a = 0; a < free.size(); ++a) w(free[a]) = z(static_cast<Index>(a));
        Index entering = -1;
        const Vector g = p.gradient(w);
        if (kkt_violation(g, w, entering) <= kkt_tol) return true;
        free.push_back(entering);
        last_added = entering;
        continue;
      }
      // Step toward z until the first support coordinate hits zero.
      double alpha = 1.0;
      for (std::size_t a = 0; a < free.size(); ++a) {
        const double wi = w(free[a]);
        const double zi = z(static_cast<Index>(a));
        if (zi <= 0.0 && wi - zi > 0.0) alpha = std::min(alpha, wi / (wi - zi));
      }
      for (std::size_t a = 0; a < free.size(); ++a) {
        const Index i = free[a];
        w(i) += alpha * (z(static_cast<Index>(a)) - w(i));
      }
      std::vector<Index> kept;
      bool dropped_new = false;
      for (std::size_t a = 0; a < free.size(); ++a) {
        const Index i = free[a];
        if (w(i) > 1e-15 && z(static_cast<Index>(a)) > 0.0) {
          kept.push_back(i);
        } else if (w(i) > 1e-15) {
          kept.push_back(i);
        } else {
          w(i) = 0.0;
          if (i == last_added && alpha == 0.0) dropped_new = true;
        }
      }
      free = std::move(kept);
      if (free.empty() || dropped_new) return false;  // degenerate: hand over to gradient steps
    }
    return false;
  };

  bool converged = run_active_set(active_set_budget);
  if (!converged) {
    used_fallback = true;
    const double lipschitz =
        std::max(1e-300, 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(p.gram, Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .maxCoeff());
    auto pg = projected_gradient(p, finalize(w), lipschitz, options.max_iterations - iterations,
                                 options.objective_tolerance);
    iterations += pg.iterations;
    w = finalize(pg.w);
    // Polish on the support the gradient method found.
    free.clear();
    for (Index j = 0; j < J; ++j)
      if (w(j) > 1e-10) free.push_back(j);
    if (free.empty()) {
      free.push_back(start);
      w.setZero();
      w(start) = 1.0;
    }
    const Vector backup = w;
    const double backup_f = p.objective(backup);
    converged = run_active_set(std::max(0, std::min(active_set_budget, options.max_iterations - iterations)));
    if (!converged || p.objective(finalize(w)) > backup_f) {
      w = backup;
      Index entering = -1;
      const Vector g = p.gradient(w);
      // Accept the gradient solution when its KKT residual is small.
      converged = kkt_violation(g, w, entering) <= 1e-6 * grad_scale;
    }
  }

  w = finalize(w);
  out.weights = w;
  out.objective = p.objective(w);
  out.iterations = iterations;
  if (!converged)
    throw ConvergenceError("simplex LS did not converge after " + std::to_string(iterations) +
                               " iterations" + (used_fallback ? " (gradient fallback)" : ""),
                           w, out.objective);
  return out;
}

Matrix regularized_covariance(const Matrix& observations, double ridge_factor) {
  const Index n = observations.rows();
  const Index p = observations.cols();
  if (n < 2) throw InputError("covariance needs at least two observations");
  const Matrix centered = observations.rowwise() - observations.colwise().mean();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const double ridge = ridge_factor * cov.trace() / static_cast<double>(p);
  cov.diagonal().array() += ridge;
  return cov;
}

MahalanobisMetric::MahalanobisMetric(const Matrix& covariance) {
  if (covariance.rows() != covariance.cols()) throw InputError("covariance must be square");
  llt_.compute(covariance);
  if (llt_.info() != Eigen::Success)
    throw NotPositiveDefiniteError("covariance is not positive definite");
  const auto& L = llt_.matrixLLT();
  for (Index i = 0; i < L.rows(); ++i)
    if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i)))
      throw NotPositiveDefiniteError("covariance is not positive definite");
}

double MahalanobisMetric::distance(const Vector& a, const Vector& b) const {
  if (a.size() != b.size() || a.size() != llt_.matrixLLT().rows())
    throw InputError("mahalanobis: dimension mismatch");
  const Vector z = llt_.matrixL().solve(a - b);
  return z.norm();
}

double mahalanobis(const Vector& a, const Vector& b, const Matrix& covariance) {
  return MahalanobisMetric(covariance).distance(a, b);
}

}  // namespace synthctl
