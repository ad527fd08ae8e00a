#include "synthctl/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace synthctl {

namespace {

Matrix rows_of(const Matrix& M, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), M.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = M.row(rows[r]);
  return out;
}

Vector rows_of(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r)) = v(rows[r]);
  return out;
}

Vector scale_of(const Matrix& Y, bool standardize) {
  Vector s = Vector::Ones(Y.cols());
  if (!standardize || Y.rows() < 2) return s;
  for (Index j = 0; j < Y.cols(); ++j) {
    const double m = Y.col(j).mean();
    const double sd = std::sqrt((Y.col(j).array() - m).square().sum() / static_cast<double>(Y.rows() - 1));
    if (sd * sd >= kZeroVarianceThreshold) s(j) = sd;
  }
  return s;
}

}  // namespace

double lambda_max(const Matrix& Y, const Vector& y) {
  if (Y.rows() != y.size() || y.size() < 2) throw InputError("lambda_max: bad shapes");
  const auto n = static_cast<double>(y.size());
  const Matrix X = Y.rowwise() - Y.colwise().mean();
  const Vector yc = y.array() - y.mean();
  const double value = ((2.0 / n) * (X.transpose() * yc)).cwiseAbs().maxCoeff();
  const double scale = (2.0 / n) * yc.norm() * X.colwise().norm().maxCoeff();
  if (!(value > 1e-12 * std::max(1.0, scale)))
    throw InputError("degenerate panel for lasso: lambda_max is zero (treated series constant or "
                     "uncorrelated with every control in the pretreatment period)");
  return value;
}

std::vector<double> lambda_grid(const Matrix& Y, const Vector& y, Index n) {
  if (n < 2) throw InputError("lambda grid needs at least two points");
  const std::vector<Index> cols = informative_columns(Y);
  Matrix Ys(Y.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) Ys.col(static_cast<Index>(c)) = Y.col(cols[c]);
  if (Ys.cols() == 0) throw InputError("degenerate panel for lasso: every control is constant");
  const double top = lambda_max(Ys, y);
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double log_top = std::log(top);
  const double log_span = std::log(1e-4);
  for (Index i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::exp(log_top + log_span * static_cast<double>(i) / static_cast<double>(n - 1));
  grid.front() = top;
  return grid;
}

std::vector<double> lambda_grid(const Panel& panel, Index n) {
  return lambda_grid(panel.controls_pre(), panel.treated_pre(), n);
}

Index default_folds(Index t0) { return t0 < 25 ? t0 : 5; }

std::vector<double> pcr_grid(const Panel& panel, Index folds) {
  const Index t0 = panel.t0();
  const Index J = static_cast<Index>(informative_columns(panel.controls_pre()).size());
  const Index largest_fold = (t0 + folds - 1) / folds;
  const Index top = std::min({t0 - 2, J, Index{30}, t0 - largest_fold - 1});
  if (top < 1) throw InputError("pcr grid is empty: too few pretreatment periods for cross-validation");
  std::vector<double> grid;
  for (Index k = 1; k <= top; ++k) grid.push_back(static_cast<double>(k));
  return grid;
}

std::vector<Index> assign_folds(Index n, Index k, RngStream& rng, bool blocked) {
  if (k < 2 || k > n)
    throw InputError("folds must satisfy 2 <= k <= T0 (got k=" + std::to_string(k) + ", T0=" +
                     std::to_string(n) + ")");
  std::vector<Index> label(static_cast<std::size_t>(n));
  if (blocked) {
    for (Index t = 0; t < n; ++t) label[static_cast<std::size_t>(t)] = t * k / n;
    return label;
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  rng.shuffle(perm.begin(), perm.end());
  for (Index i = 0; i < n; ++i) label[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i % k;
  return label;
}

CvResult cross_validate(const Panel& panel, Method method, const std::vector<double>& grid, Index k,
                        RngStream& rng, const CvOptions& options) {
  if (method != Method::LASSO && method != Method::PCR)
    throw InputError("cross-validation supports lasso and pcr only (got " + to_string(method) + ")");
  if (grid.empty()) throw InputError("cross-validation grid is empty");
  const Index t0 = panel.t0();

  CvResult res;
  res.method = method;
  res.grid = grid;
  res.k = k;
  res.seed = rng.seed();
  res.blocked = options.blocked;
  res.fold_assignment = assign_folds(t0, k, rng, options.blocked);

  const Matrix Yall = panel.controls_pre();
  const Vector yall = panel.treated_pre();
  const std::vector<Index> cols = informative_columns(Yall);
  Matrix Y(t0, static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) Y.col(static_cast<Index>(c)) = Yall.col(cols[c]);
  const auto n_cand = grid.size();

  // Candidates are visited from most to least regularized so Lasso can warm start.
  std::vector<std::size_t> visit(n_cand);
  std::iota(visit.begin(), visit.end(), std::size_t{0});
  std::stable_sort(visit.begin(), visit.end(), [&](std::size_t a, std::size_t b) {
    return method == Method::LASSO ? grid[a] > grid[b] : grid[a] < grid[b];
  });

  for (double g : grid) {
    if (method == Method::LASSO && !(g >= 0.0)) throw InputError("lambda grid values must be >= 0");
    if (method == Method::PCR && (g < 1.0 || g != std::floor(g)))
      throw InputError("pcr grid values must be positive integers");
  }

  std::vector<double> sse(n_cand, 0.0);
  std::vector<bool> failed(n_cand, false);
  for (Index f = 0; f < k; ++f) {
    std::vector<Index> train, test;
    for (Index t = 0; t < t0; ++t)
      (res.fold_assignment[static_cast<std::size_t>(t)] == f ? test : train).push_back(t);
    if (train.size() < 3)
      throw InputError("fold " + std::to_string(f) + " leaves only " + std::to_string(train.size()) +
                       " training rows; need at least 3");
    Matrix Ytr = rows_of(Y, train);
    const Vector ytr = rows_of(yall, train);
    const Matrix Yte = rows_of(Y, test);
    const Vector yte = rows_of(yall, test);
    const Vector scale = scale_of(Ytr, options.scaling.standardize);
    Ytr = Ytr * scale.cwiseInverse().asDiagonal();

    Vector warm;
    for (std::size_t ci : visit) {
      if (failed[ci]) continue;
      Vector w;
      double alpha = 0.0;
      if (method == Method::LASSO) {
        try {
          const LassoSolution sol = lasso_solve(Ytr, ytr, grid[ci], options.lasso, warm);
          w = sol.weights;
          alpha = sol.alpha;
        } catch (const ConvergenceError& e) {
          w = e.best_iterate();
          alpha = ytr.mean() - Ytr.colwise().mean().transpose().dot(w);
          res.warnings.push_back("fold " + std::to_string(f) + ": " + e.what() + "; using best iterate");
        }
        warm = w;
      } else {
        const auto kk = static_cast<Index>(grid[ci]);
        if (kk > std::min(Ytr.rows() - 1, Ytr.cols()))
          throw InputError("pcr candidate k=" + std::to_string(kk) + " exceeds what fold " + std::to_string(f) +
                           " can support (" + std::to_string(Ytr.rows()) + " training rows)");
        try {
          w = pcr_solve(Ytr, ytr, kk);
        } catch (const NumericalError& e) {
          failed[ci] = true;
          res.warnings.push_back("pcr k=" + std::to_string(kk) + " failed on fold " + std::to_string(f) +
                                 ": " + e.what());
          continue;
        }
      }
      const Vector pred = (Yte * w.cwiseQuotient(scale)).array() + alpha;
      sse[ci] += (yte - pred).squaredNorm() / static_cast<double>(yte.size());
    }
  }

  res.cv_curve.assign(n_cand, std::numeric_limits<double>::quiet_NaN());
  bool any = false;
  for (std::size_t ci = 0; ci < n_cand; ++ci) {
    if (failed[ci]) continue;
    res.cv_curve[ci] = sse[ci] / static_cast<double>(k);
    const bool more_regularized = method == Method::LASSO ? grid[ci] > grid[res.chosen_index]
                                                          : grid[ci] < grid[res.chosen_index];
    if (!any || res.cv_curve[ci] < res.cv_curve[res.chosen_index] ||
        (res.cv_curve[ci] == res.cv_curve[res.chosen_index] && more_regularized)) {
      res.chosen_index = ci;
      any = true;
    }
  }
  if (!any) throw NumericalError("cross-validation failed for every candidate");
  res.chosen = grid[res.chosen_index];
  return res;
}

}  // namespace synthctl
