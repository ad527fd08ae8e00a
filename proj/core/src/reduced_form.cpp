#include "synthctl/reduced_form.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "synthctl/linalg.hpp"

namespace synthctl {

std::string to_string(Method m) {
  switch (m) {
    case Method::OLS: return "OLS";
    case Method::PCR: return "PCR";
    case Method::LASSO: return "LASSO";
    case Method::ADH: return "ADH";
    case Method::MDD: return "MDD";
    case Method::SPATIAL: return "SPATIAL";
    case Method::BSTS: return "BSTS";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : {Method::OLS, Method::PCR, Method::LASSO, Method::ADH, Method::MDD,
                   Method::SPATIAL, Method::BSTS})
    if (to_string(m) == upper) return m;
  throw InputError("unknown method '" + name + "' (expected ols, pcr, lasso, adh, mdd, spatial or bsts)");
}

namespace {

Matrix select_columns(const Matrix& Y, const std::vector<Index>& cols) {
  Matrix out(Y.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = Y.col(cols[c]);
  return out;
}

Vector scatter(const Vector& sub, const std::vector<Index>& cols, Index J) {
  Vector w = Vector::Zero(J);
  for (std::size_t c = 0; c < cols.size(); ++c) w(cols[c]) = sub(static_cast<Index>(c));
  return w;
}

Vector column_stds(const Matrix& Y) {
  Vector s(Y.cols());
  for (Index j = 0; j < Y.cols(); ++j) {
    const double m = Y.col(j).mean();
    s(j) = std::sqrt((Y.col(j).array() - m).square().sum() / static_cast<double>(Y.rows() - 1));
  }
  return s;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

Fit finish(Method method, double alpha, Vector weights, const Panel& panel) {
  Fit f;
  f.method = method;
  f.alpha = alpha;
  f.weights = std::move(weights);
  f.fitted_pre = (panel.controls_pre() * f.weights).array() + alpha;
  return f;
}

constexpr int kMaxSupportDrops = 25;

}  // namespace

std::vector<Index> informative_columns(const Matrix& Y) {
  std::vector<Index> cols;
  if (Y.rows() < 2) return cols;
  const Vector s = column_stds(Y);
  for (Index j = 0; j < Y.cols(); ++j)
    if (s(j) * s(j) >= kZeroVarianceThreshold) cols.push_back(j);
  return cols;
}

double lasso_objective(const Matrix& Y, const Vector& y, double alpha, const Vector& w, double lambda) {
  const Vector r = (y - Y * w).array() - alpha;
  return r.squaredNorm() / static_cast<double>(y.size()) + lambda * w.lpNorm<1>();
}

LassoSolution lasso_solve(const Matrix& Y, const Vector& y, double lambda, const LassoOptions& options,
                          const Vector& warm_start) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lasso: lambda must be >= 0");
  if (Y.rows() != y.size()) throw InputError("lasso: Y and y row counts differ");
  if (y.size() < 2) throw InputError("lasso: need at least two observations");
  const Index n = Y.rows();
  const Index J = Y.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  const Vector ymean = Y.colwise().mean().transpose();
  const double y_bar = y.mean();
  const Matrix X = Y.rowwise() - ymean.transpose();
  const Vector yc = y.array() - y_bar;
  // Covariance-update form: g = X'(yc - Xw) is maintained incrementally.
  const Matrix G = X.transpose() * X;
  const Vector c = X.transpose() * yc;
  const double yy = yc.squaredNorm();

  Vector w = Vector::Zero(J);
  if (warm_start.size() == J) w = warm_start;
  for (Index j = 0; j < J; ++j)
    if (G(j, j) * inv_n < kZeroVarianceThreshold) w(j) = 0.0;
  Vector g = c - G * w;

  auto objective = [&](const Vector& v) {
    return inv_n * (yy - 2.0 * c.dot(v) + v.dot(G * v)) + lambda * v.lpNorm<1>();
  };

  // Active-set move on the current support with signs held fixed: step
  // towards the face minimizer, and whenever a coefficient reaches zero on
  // the way, drop it and re-solve on the smaller support.
  auto support_step = [&] {
    std::vector<Index> A;
    for (Index j = 0; j < J; ++j)
      if (w(j) != 0.0) A.push_back(j);
    const double before = objective(w);
    Vector trial = w;
    for (int drops = 0; drops <= kMaxSupportDrops && !A.empty(); ++drops) {
      const auto m = static_cast<Index>(A.size());
      Matrix GA(m, m);
      Vector r(m), sign(m), cur(m);
      for (Index a = 0; a < m; ++a) {
        const Index ja = A[static_cast<std::size_t>(a)];
        cur(a) = trial(ja);
        sign(a) = cur(a) > 0.0 ? 1.0 : -1.0;
        r(a) = c(ja) - 0.5 * lambda * static_cast<double>(n) * sign(a);
        for (Index b = 0; b < m; ++b) GA(a, b) = G(ja, A[static_cast<std::size_t>(b)]);
      }
      r -= GA * cur;
      Matrix H = GA;
      H.diagonal().array() += 1e-10 * GA.trace() / static_cast<double>(m);
      const Eigen::LLT<Matrix> llt(H);
      if (llt.info() != Eigen::Success) break;
      const Vector d = llt.solve(r);
      const double slope = r.dot(d);
      const double curvature = d.dot(GA * d);
      if (!(slope > 0.0) || !(curvature > 0.0) || !d.allFinite()) break;
      double t = slope / curvature;
      Index blocking = -1;
      for (Index a = 0; a < m; ++a) {
        if ((cur(a) + t * d(a)) * sign(a) < 0.0) {
          t = -cur(a) / d(a);
          blocking = a;
        }
      }
      for (Index a = 0; a < m; ++a) {
        double v = cur(a) + t * d(a);
        if (a == blocking || v * sign(a) <= 0.0) v = 0.0;
        trial(A[static_cast<std::size_t>(a)]) = v;
      }
      if (blocking < 0) break;
      std::erase_if(A, [&](Index j) { return trial(j) == 0.0; });
    }
    if (objective(trial) <= before) {
      w = std::move(trial);
      g = c - G * w;
    }
  };

  LassoSolution out;
  double last_change = 0.0;
  while (out.sweeps < options.max_sweeps) {
    ++out.sweeps;
    double max_change = 0.0;
    for (Index j = 0; j < J; ++j) {
      const double gjj = G(j, j);
      if (gjj * inv_n < kZeroVarianceThreshold) continue;
      const double old = w(j);
      const double rho = (g(j) + gjj * old) * inv_n;  // (1/n) x_j' r_{-j}
      const double next = soft_threshold(rho, 0.5 * lambda) / (gjj * inv_n);
      const double delta = next - old;
      if (delta != 0.0) {
        w(j) = next;
        g.noalias() -= G.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (options.objective_trace) options.objective_trace->push_back(objective(w));
    last_change = max_change;
    if (max_change < options.tolerance) {
      out.weights = std::move(w);
      out.alpha = y_bar - ymean.dot(out.weights);
      return out;
    }
    if (options.support_step_every > 0 && out.sweeps % options.support_step_every == 0) support_step();
  }
  throw ConvergenceError("lasso coordinate descent did not converge in " +
                             std::to_string(options.max_sweeps) + " sweeps (lambda=" +
                             std::to_string(lambda) + ")",
                         w, last_change);
}

Vector pcr_solve(const Matrix& Y, const Vector& y, Index k) {
  if (k < 1 || k > std::min(Y.rows() - 1, Y.cols()))
    throw InputError("pcr: k=" + std::to_string(k) + " outside [1, min(T0-1, J)=" +
                     std::to_string(std::min(Y.rows() - 1, Y.cols())) + "]");
  const PrincipalComponents pc = principal_components(Y, k);
  return pc.loadings * solve_least_squares(pc.scores, y);
}

Fit fit_ols(const Panel& panel, bool intercept) {
  const Matrix Y = panel.controls_pre();
  const Vector y = panel.treated_pre();
  const std::vector<Index> cols = informative_columns(Y);
  const auto p = static_cast<Index>(cols.size()) + (intercept ? 1 : 0);
  if (panel.t0() <= p)
    throw InputError("ols needs more pretreatment periods than parameters (T0=" +
                     std::to_string(panel.t0()) + ", parameters=" + std::to_string(p) +
                     "); use a regularized method such as lasso, pcr or adh");
  Matrix X(Y.rows(), p);
  if (intercept) X.col(0).setOnes();
  X.rightCols(static_cast<Index>(cols.size())) = select_columns(Y, cols);
  const Vector beta = solve_least_squares(X, y);
  const double alpha = intercept ? beta(0) : 0.0;
  Fit f = finish(Method::OLS, alpha, scatter(beta.tail(static_cast<Index>(cols.size())), cols, panel.units()), panel);
  f.hyperparams["intercept"] = intercept ? 1.0 : 0.0;
  return f;
}

Fit fit_pcr(const Panel& panel, Index k, const ScalingOptions& scaling) {
  const Matrix Y = panel.controls_pre();
  const std::vector<Index> cols = informative_columns(Y);
  Matrix Ys = select_columns(Y, cols);
  Vector scale = Vector::Ones(Ys.cols());
  if (scaling.standardize) {
    scale = column_stds(Ys);
    Ys = Ys * scale.cwiseInverse().asDiagonal();
  }
  const Vector w = pcr_solve(Ys, panel.treated_pre(), k).cwiseQuotient(scale);
  Fit f = finish(Method::PCR, 0.0, scatter(w, cols, panel.units()), panel);
  f.hyperparams["k"] = static_cast<double>(k);
  f.scaled = scaling.standardize;
  return f;
}

Fit fit_lasso(const Panel& panel, double lambda, const ScalingOptions& scaling, const LassoOptions& options) {
  const Matrix Y = panel.controls_pre();
  const Vector y = panel.treated_pre();
  const std::vector<Index> cols = informative_columns(Y);
  Matrix Ys = select_columns(Y, cols);
  Vector scale = Vector::Ones(Ys.cols());
  if (scaling.standardize) {
    scale = column_stds(Ys);
    Ys = Ys * scale.cwiseInverse().asDiagonal();
  }
  const LassoSolution sol = lasso_solve(Ys, y, lambda, options);
  Fit f = finish(Method::LASSO, sol.alpha, scatter(sol.weights.cwiseQuotient(scale), cols, panel.units()), panel);
  f.hyperparams["lambda"] = lambda;
  f.scaled = scaling.standardize;
  f.iterations = sol.sweeps;
  return f;
}

Fit fit_adh(const Panel& panel) {
  const SimplexSolution sol = simplex_constrained_ls(panel.controls_pre(), panel.treated_pre());
  Fit f = finish(Method::ADH, 0.0, sol.weights, panel);
  f.iterations = sol.iterations;
  return f;
}

Fit fit_mdd(const Panel& panel, Index matches) {
  const Index J = panel.units();
  if (matches < 1 || matches > J)
    throw InputError("mdd: matches=" + std::to_string(matches) + " outside [1, J=" + std::to_string(J) + "]");
  const Matrix Y = panel.controls_pre();
  const Vector y = panel.treated_pre();

  std::vector<Index> order(static_cast<std::size_t>(J));
  std::iota(order.begin(), order.end(), Index{0});
  if (matches < J) {
    // Units are observations, pretreatment periods the coordinates.
    const MahalanobisMetric metric(regularized_covariance(Y.transpose()));
    std::vector<double> d(static_cast<std::size_t>(J));
    for (Index j = 0; j < J; ++j) d[static_cast<std::size_t>(j)] = metric.distance(y, Y.col(j));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)];
    });
  }
  Vector w = Vector::Zero(J);
  for (Index m = 0; m < matches; ++m) w(order[static_cast<std::size_t>(m)]) = 1.0 / static_cast<double>(matches);
  const double alpha = (y - Y * w).mean();
  Fit f = finish(Method::MDD, alpha, std::move(w), panel);
  f.hyperparams["matches"] = static_cast<double>(matches);
  return f;
}

Fit fit_spatial(const Panel& panel, const DistanceInfo& dist) {
  const Index J = panel.units();
  if (dist.a.size() != J)
    throw InputError("spatial: " + std::to_string(dist.a.size()) + " distances for " + std::to_string(J) + " controls");
  if (!(dist.zeta > 0.0)) throw InputError("spatial: zeta must be positive");
  if ((dist.a.array() < 0.0).any() || !dist.a.allFinite())
    throw InputError("spatial: distances must be finite and nonnegative");
  double nearest = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < J; ++j)
    if (dist.a(j) < dist.cutoff) nearest = std::min(nearest, dist.a(j));
  if (!std::isfinite(nearest)) throw InputError("spatial: every control lies beyond the cutoff");
  Vector w = Vector::Zero(J);
  for (Index j = 0; j < J; ++j)
    if (dist.a(j) < dist.cutoff) w(j) = std::exp(-dist.zeta * (dist.a(j) - nearest));
  w /= w.sum();
  Fit f = finish(Method::SPATIAL, 0.0, std::move(w), panel);
  f.hyperparams["zeta"] = dist.zeta;
  f.hyperparams["cutoff"] = dist.cutoff;
  return f;
}

Vector predict(const Fit& fit, const Panel& panel) {
  if (fit.weights.size() != panel.units())
    throw InputError("predict: fit has " + std::to_string(fit.weights.size()) + " weights, panel has " +
                     std::to_string(panel.units()) + " controls");
  return (panel.controls_post() * fit.weights).array() + fit.alpha;
}

}  // namespace synthctl
