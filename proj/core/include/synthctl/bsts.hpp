#pragma once

#include <cstdint>
#include <vector>

#include "synthctl/kalman.hpp"
#include "synthctl/panel.hpp"
#include "synthctl/random.hpp"

namespace synthctl {

struct InverseGammaPrior {
  double shape = 0.01;
  double scale = 0.1;
};

struct BstsPriors {
  InverseGammaPrior level{0.01, 0.1};  // sigma_1^2: (a0, c0)
  InverseGammaPrior slope{0.01, 0.1};  // sigma_2^2: (d0, e0)
  InverseGammaPrior obs{0.1, 1.0};     // sigma^2:   (s0, r0)
  Vector coef_mean;                    // omega_0, length J
  Matrix coef_template;                // (1/T0)(w Y'Y + (1 - w) diag(Y'Y))
  /// false: the template is the prior covariance V0 (as written).
  /// true: the template is the prior precision V0^{-1} (conventional g-prior).
  bool template_is_precision = false;
  Vector inclusion;  // q_j
  double expected_r2 = 0.5;
  double template_weight = 0.5;
};

/// Priors for a pretreatment block: r0 = s0 (1 - R^2) s_y^2, omega_0 = 0, q_j = q.
BstsPriors default_priors(const Matrix& Y, const Vector& y, double expected_r2 = 0.5,
                          double template_weight = 0.5, double inclusion = 0.5);

/// Y'Y, Y'y~ and y~'y~ for the regression y~ = Y w + e.
struct RegressionStats {
  Matrix YtY;
  Vector Yty;
  double yty = 0.0;
  Index n = 0;
};
RegressionStats regression_stats(const Matrix& Y, const Vector& y_tilde);

/// Conjugate posterior of (w, sigma^2) on the active set of `kappa`.
struct ConjugatePosterior {
  std::vector<Index> active;
  Matrix precision_factor;  // lower Cholesky factor of V1^{-1}
  Vector omega1;
  double s1 = 0.0;
  double r1 = 0.0;
  double log_det_v1 = 0.0;
  double log_det_v0 = 0.0;
  double log_marginal = 0.0;  // log p(y~ | kappa) + log p(kappa)
};
ConjugatePosterior conjugate_posterior(const RegressionStats& stats, const BstsPriors& priors,
                                       const std::vector<std::uint8_t>& kappa);

/// -(n/2) log 2pi + 1/2 log|V1| - 1/2 log|V0| + log G(s1) - log G(s0)
///   + s0 log r0 - s1 log r1 + sum_j [k_j log q_j + (1 - k_j) log(1 - q_j)].
double log_marginal_likelihood(const Vector& y_tilde, const Matrix& Y, const BstsPriors& priors,
                               const std::vector<std::uint8_t>& kappa);
double log_marginal_likelihood(const RegressionStats& stats, const BstsPriors& priors,
                               const std::vector<std::uint8_t>& kappa);

/// p(kappa_j = 1 | kappa_{-j}, y~).
double conditional_inclusion_probability(const RegressionStats& stats, const BstsPriors& priors,
                                         std::vector<std::uint8_t> kappa, Index j);

struct TrendVarianceDraw {
  double level_var = 0.0;
  double slope_var = 0.0;
  double a1 = 0.0, c1 = 0.0;  // level posterior
  double d1 = 0.0, e1 = 0.0;  // slope posterior
};

/// a1 = a0 + n/2, c1 = c0 + 1/2 sum_{t>=2} (xi_t - xi_{t-1} - nu_{t-1})^2;
/// d1 = d0 + n/2, e1 = e0 + 1/2 sum_{t>=2} (nu_t - nu_{t-1})^2.
TrendVarianceDraw draw_trend_variances(const Matrix& states, const BstsPriors& priors, RngStream& rng);

struct SpikeSlabDraw {
  std::vector<std::uint8_t> kappa;
  double obs_var = 0.0;
  Vector weights;  // dense length J, zero where kappa_j = 0
  double s1 = 0.0;
  double r1 = 0.0;
};

/// One sweep of kappa updates in random order, then sigma^2 ~ IG(s1, r1) and
/// w ~ N(omega1, sigma^2 V1) on the active set.
SpikeSlabDraw spike_slab_gibbs_step(const RegressionStats& stats, const BstsPriors& priors,
                                    std::vector<std::uint8_t> kappa, RngStream& rng);
SpikeSlabDraw spike_slab_gibbs_step(const Vector& y_tilde, const Matrix& Y, const BstsPriors& priors,
                                    std::vector<std::uint8_t> kappa, RngStream& rng);

struct BstsOptions {
  int iterations = 5000;
  int burn_in = 1000;
  bool keep_states = false;  // store the full state path of every draw
  double diffuse = 1e6;
};

struct BstsDraw {
  double level_var = 0.0;
  double slope_var = 0.0;
  double obs_var = 0.0;
  std::vector<std::uint8_t> kappa;
  Vector weights;
  Vector3 final_state;  // x_{T0}
  Matrix states;        // T0 x 3 when keep_states
  double a1 = 0.0, c1 = 0.0, d1 = 0.0, e1 = 0.0, s1 = 0.0, r1 = 0.0;
};

struct BstsPosterior {
  std::vector<BstsDraw> draws;  // all iterations, burn-in included
  int burn_in = 0;
  BstsPriors priors;
  Vector fitted_pre;        // mean over retained draws of xi_t + w'y_t
  Matrix predicted_paths;   // retained draws x (T - T0), filled by predict_paths

  std::size_t retained() const { return draws.size() - static_cast<std::size_t>(burn_in); }
};

/// Algorithm: simulation smoother, trend variances, spike-and-slab step.
BstsPosterior run_gibbs(const Panel& panel, const BstsPriors& priors, const BstsOptions& options,
                        RngStream& rng);

/// One counterfactual path per retained draw, propagated from that draw's
/// x_{T0} with its (w, sigma^2, Q) held fixed along the path.
Matrix predict_paths(const BstsPosterior& posterior, const Panel& panel, RngStream& rng);

struct PathSummary {
  Vector mean;
  Vector lower;  // 2.5% pointwise quantile
  Vector upper;  // 97.5%
};
PathSummary summarize_paths(const Matrix& paths, double coverage = 0.95);

/// Share of retained draws with kappa_j = 1.
Vector inclusion_frequencies(const BstsPosterior& posterior);
Vector posterior_mean_weights(const BstsPosterior& posterior);

}  // namespace synthctl
