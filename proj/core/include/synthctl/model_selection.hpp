#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthctl/random.hpp"
#include "synthctl/reduced_form.hpp"

namespace synthctl {

struct CvOptions {
  bool blocked = false;  // contiguous folds instead of a random partition
  ScalingOptions scaling;
  LassoOptions lasso;
};

struct CvResult {
  Method method = Method::LASSO;
  std::vector<double> grid;
  std::vector<double> cv_curve;  // mean held-out MSE; NaN where every fold failed
  double chosen = 0.0;
  std::size_t chosen_index = 0;
  std::vector<Index> fold_assignment;  // fold label per pretreatment row
  Index k = 0;
  std::uint64_t seed = 0;
  bool blocked = false;
  std::vector<std::string> warnings;
};

/// Smallest lambda that zeroes every coefficient:
/// max_j |(2/T0) sum_t yc_0t yc_jt| over centered series.
double lambda_max(const Matrix& Y, const Vector& y);

/// `n` log-spaced values from lambda_max down to 1e-4 * lambda_max.
std::vector<double> lambda_grid(const Panel& panel, Index n = 50);
std::vector<double> lambda_grid(const Matrix& Y, const Vector& y, Index n = 50);

/// {1, ..., min(T0 - 2, J, 30, smallest training split - 1)}.
std::vector<double> pcr_grid(const Panel& panel, Index folds);

/// 5, or T0 (leave-one-out) when T0 < 25.
Index default_folds(Index t0);

/// Fold label per row. Random: a permutation dealt round-robin, so sizes
/// differ by at most one. Blocked: contiguous runs.
std::vector<Index> assign_folds(Index n, Index k, RngStream& rng, bool blocked = false);

/// k-fold CV over the pretreatment rows for LASSO (grid of lambdas) or PCR
/// (grid of component counts). Ties go to the more regularized candidate.
CvResult cross_validate(const Panel& panel, Method method, const std::vector<double>& grid, Index k,
                        RngStream& rng, const CvOptions& options = {});

}  // namespace synthctl
