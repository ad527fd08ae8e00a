#include "synthctl/bsts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace synthctl {

namespace {

constexpr double kNearSingular = 1e-12;

// Cholesky with the +1e-10 * trace ridge applied when A is near-singular.
Eigen::LLT<Matrix> robust_llt(Matrix A, const char* what) {
  Eigen::LLT<Matrix> llt(A);
  auto ill = [&] {
    if (llt.info() != Eigen::Success) return true;
    const Vector d = llt.matrixLLT().diagonal();
    if (!d.allFinite()) return true;
    const double lo = d.minCoeff();
    const double hi = d.maxCoeff();
    return !(lo > 0.0) || lo * lo < kNearSingular * hi * hi;
  };
  if (ill()) {
    const double ridge = 1e-10 * A.trace();
    if (!(ridge > 0.0)) throw NotPositiveDefiniteError(std::string(what) + " has zero trace");
    A.diagonal().array() += ridge;
    llt.compute(A);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefiniteError(std::string(what) + " is not positive definite after regularization");
  }
  return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double inclusion_log_prior(const Vector& q, const std::vector<std::uint8_t>& kappa) {
  double lp = 0.0;
  for (std::size_t j = 0; j < kappa.size(); ++j) {
    const double qj = q(static_cast<Index>(j));
    if (kappa[j]) {
      if (qj <= 0.0) return -std::numeric_limits<double>::infinity();
      lp += std::log(qj);
    } else {
      if (qj >= 1.0) return -std::numeric_limits<double>::infinity();
      lp += std::log1p(-qj);
    }
  }
  return lp;
}

void check_priors(const BstsPriors& p, Index J) {
  for (const auto* ig : {&p.level, &p.slope, &p.obs})
    if (!(ig->shape > 0.0) || !(ig->scale > 0.0))
      throw InputError("bsts priors: inverse-gamma shape and scale must be positive");
  if (p.coef_mean.size() != J || p.coef_template.rows() != J || p.coef_template.cols() != J ||
      p.inclusion.size() != J)
    throw InputError("bsts priors: coefficient prior dimensions do not match J=" + std::to_string(J));
  if ((p.inclusion.array() < 0.0).any() || (p.inclusion.array() > 1.0).any())
    throw InputError("bsts priors: inclusion probabilities must lie in [0, 1]");
}

}  // namespace

BstsPriors default_priors(const Matrix& Y, const Vector& y, double expected_r2, double template_weight,
                          double inclusion) {
  if (Y.rows() != y.size() || y.size() < 2) throw InputError("bsts priors: bad shapes");
  if (!(expected_r2 >= 0.0 && expected_r2 < 1.0)) throw InputError("bsts priors: R^2 must lie in [0, 1)");
  const auto n = static_cast<double>(y.size());
  const double sy2 = (y.array() - y.mean()).square().sum() / (n - 1.0);
  if (!(sy2 > 0.0)) throw InputError("bsts priors: treated series is constant in the pretreatment period");
  BstsPriors p;
  p.expected_r2 = expected_r2;
  p.template_weight = template_weight;
  p.obs.shape = 0.1;
  p.obs.scale = p.obs.shape * (1.0 - expected_r2) * sy2;
  const Index J = Y.cols();
  p.coef_mean = Vector::Zero(J);
  const Matrix YtY = Y.transpose() * Y;
  p.coef_template = template_weight * YtY;
  p.coef_template.diagonal() += (1.0 - template_weight) * YtY.diagonal();
  p.coef_template /= n;
  p.inclusion = Vector::Constant(J, inclusion);
  return p;
}

RegressionStats regression_stats(const Matrix& Y, const Vector& y_tilde) {
  if (Y.rows() != y_tilde.size()) throw InputError("regression stats: row mismatch");
  RegressionStats s;
  s.YtY = Y.transpose() * Y;
  s.Yty = Y.transpose() * y_tilde;
  s.yty = y_tilde.squaredNorm();
  s.n = Y.rows();
  return s;
}

ConjugatePosterior conjugate_posterior(const RegressionStats& stats, const BstsPriors& priors,
                                       const std::vector<std::uint8_t>& kappa) {
  const Index J = stats.YtY.rows();
  if (static_cast<Index>(kappa.size()) != J) throw InputError("kappa length does not match J");
  ConjugatePosterior out;
  for (Index j = 0; j < J; ++j)
    if (kappa[static_cast<std::size_t>(j)]) out.active.push_back(j);
  const auto m = static_cast<Index>(out.active.size());
  const double s0 = priors.obs.shape;
  const double r0 = priors.obs.scale;
  const double n = static_cast<double>(stats.n);
  out.s1 = s0 + 0.5 * n;

  double quad = stats.yty;
  if (m > 0) {
    Matrix templ(m, m);
    Matrix gram(m, m);
    Vector w0(m), cross(m);
    for (Index a = 0; a < m; ++a) {
      const Index ia = out.active[static_cast<std::size_t>(a)];
      w0(a) = priors.coef_mean(ia);
      cross(a) = stats.Yty(ia);
      for (Index b = 0; b < m; ++b) {
        const Index ib = out.active[static_cast<std::size_t>(b)];
        templ(a, b) = priors.coef_template(ia, ib);
        gram(a, b) = stats.YtY(ia, ib);
      }
    }
    const Eigen::LLT<Matrix> tllt = robust_llt(templ, "coefficient prior block");
    Matrix prior_precision;
    if (priors.template_is_precision) {
      prior_precision = templ;
      out.log_det_v0 = -log_det(tllt);
    } else {
      prior_precision = tllt.solve(Matrix::Identity(m, m));
      prior_precision = 0.5 * (prior_precision + prior_precision.transpose());
      out.log_det_v0 = log_det(tllt);
    }
    const Vector prior_shift = prior_precision * w0;
    const Eigen::LLT<Matrix> pllt = robust_llt(gram + prior_precision, "posterior precision");
    const Vector b = cross + prior_shift;
    out.omega1 = pllt.solve(b);
    out.precision_factor = pllt.matrixL();
    out.log_det_v1 = -log_det(pllt);
    quad += w0.dot(prior_shift) - b.dot(out.omega1);
  }
  out.r1 = r0 + 0.5 * std::max(quad, 0.0);
  const double lp = inclusion_log_prior(priors.inclusion, kappa);
  out.log_marginal = -0.5 * n * std::log(2.0 * std::numbers::pi) + 0.5 * out.log_det_v1 -
                     0.5 * out.log_det_v0 + std::lgamma(out.s1) - std::lgamma(s0) + s0 * std::log(r0) -
                     out.s1 * std::log(out.r1) + lp;
  return out;
}

double log_marginal_likelihood(const RegressionStats& stats, const BstsPriors& priors,
                               const std::vector<std::uint8_t>& kappa) {
  return conjugate_posterior(stats, priors, kappa).log_marginal;
}

double log_marginal_likelihood(const Vector& y_tilde, const Matrix& Y, const BstsPriors& priors,
                               const std::vector<std::uint8_t>& kappa) {
  check_priors(priors, Y.cols());
  return log_marginal_likelihood(regression_stats(Y, y_tilde), priors, kappa);
}

namespace {

double inclusion_from_logs(double with, double without) {
  if (with == -std::numeric_limits<double>::infinity()) return 0.0;
  if (without == -std::numeric_limits<double>::infinity()) return 1.0;
  return 1.0 / (1.0 + std::exp(without - with));
}

}  // namespace

double conditional_inclusion_probability(const RegressionStats& stats, const BstsPriors& priors,
                                         std::vector<std::uint8_t> kappa, Index j) {
  kappa[static_cast<std::size_t>(j)] = 1;
  const double with = log_marginal_likelihood(stats, priors, kappa);
  kappa[static_cast<std::size_t>(j)] = 0;
  const double without = log_marginal_likelihood(stats, priors, kappa);
  return inclusion_from_logs(with, without);
}

TrendVarianceDraw draw_trend_variances(const Matrix& states, const BstsPriors& priors, RngStream& rng) {
  if (states.cols() != 3 || states.rows() < 2) throw InputError("trend variances need an n x 3 state path");
  const Index n = states.rows();
  double level_ss = 0.0;
  double slope_ss = 0.0;
  for (Index t = 1; t < n; ++t) {
    const double e1 = states(t, 0) - states(t - 1, 0) - states(t - 1, 1);
    const double e2 = states(t, 1) - states(t - 1, 1);
    level_ss += e1 * e1;
    slope_ss += e2 * e2;
  }
  TrendVarianceDraw d;
  d.a1 = priors.level.shape + 0.5 * static_cast<double>(n);
  d.c1 = priors.level.scale + 0.5 * level_ss;
  d.d1 = priors.slope.shape + 0.5 * static_cast<double>(n);
  d.e1 = priors.slope.scale + 0.5 * slope_ss;
  d.level_var = draw_inverse_gamma(d.a1, d.c1, rng);
  d.slope_var = draw_inverse_gamma(d.d1, d.e1, rng);
  return d;
}

SpikeSlabDraw spike_slab_gibbs_step(const RegressionStats& stats, const BstsPriors& priors,
                                    std::vector<std::uint8_t> kappa, RngStream& rng) {
  const Index J = stats.YtY.rows();
  if (static_cast<Index>(kappa.size()) != J) throw InputError("kappa length does not match J");
  std::vector<Index> order(static_cast<std::size_t>(J));
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(order.begin(), order.end());

  double current = log_marginal_likelihood(stats, priors, kappa);
  for (Index j : order) {
    auto& kj = kappa[static_cast<std::size_t>(j)];
    const std::uint8_t was = kj;
    kj = was ? 0 : 1;
    const double flipped = log_marginal_likelihood(stats, priors, kappa);
    const double p1 = was ? inclusion_from_logs(current, flipped) : inclusion_from_logs(flipped, current);
    const std::uint8_t now = draw_bernoulli(p1, rng) ? 1 : 0;
    kj = now;
    if (now != was) current = flipped;
  }

  const ConjugatePosterior post = conjugate_posterior(stats, priors, kappa);
  SpikeSlabDraw out;
  out.kappa = std::move(kappa);
  out.s1 = post.s1;
  out.r1 = post.r1;
  out.obs_var = draw_inverse_gamma(post.s1, post.r1, rng);
  out.weights = Vector::Zero(J);
  const auto m = static_cast<Index>(post.active.size());
  if (m > 0) {
    Vector z(m);
    for (Index a = 0; a < m; ++a) z(a) = rng.normal();
    // V1 = (L L')^{-1}, so L'^{-1} z has covariance V1.
    const Vector dev = post.precision_factor.transpose().triangularView<Eigen::Upper>().solve(z);
    const Vector w = post.omega1 + std::sqrt(out.obs_var) * dev;
    for (Index a = 0; a < m; ++a) out.weights(post.active[static_cast<std::size_t>(a)]) = w(a);
  }
  return out;
}

SpikeSlabDraw spike_slab_gibbs_step(const Vector& y_tilde, const Matrix& Y, const BstsPriors& priors,
                                    std::vector<std::uint8_t> kappa, RngStream& rng) {
  check_priors(priors, Y.cols());
  return spike_slab_gibbs_step(regression_stats(Y, y_tilde), priors, std::move(kappa), rng);
}

BstsPosterior run_gibbs(const Panel& panel, const BstsPriors& priors, const BstsOptions& options,
                        RngStream& rng) {
  if (!(options.iterations > options.burn_in) || options.burn_in < 0)
    throw InputError("bsts: need iterations > burn_in >= 0 (got " + std::to_string(options.iterations) +
                     ", " + std::to_string(options.burn_in) + ")");
  const Matrix Y = panel.controls_pre();
  const Vector y = panel.treated_pre();
  const Index J = Y.cols();
  const Index n = y.size();
  check_priors(priors, J);
  if (n < 2) throw InputError("bsts needs at least two pretreatment periods");

  const double sy2 = (y.array() - y.mean()).square().sum() / static_cast<double>(n - 1);
  RegressionStats stats;
  stats.YtY = Y.transpose() * Y;
  stats.n = n;

  BstsPosterior post;
  post.burn_in = options.burn_in;
  post.priors = priors;
  post.draws.reserve(static_cast<std::size_t>(options.iterations));
  post.fitted_pre = Vector::Zero(n);

  std::vector<std::uint8_t> kappa(static_cast<std::size_t>(J), 0);
  Vector weights = Vector::Zero(J);
  double obs_var = sy2;
  double level_var = 0.01 * sy2;
  double slope_var = 0.01 * sy2;

  for (int it = 0; it < options.iterations; ++it) {
    try {
      const StateSpaceModel model =
          StateSpaceModel::local_linear_trend(Y * weights, obs_var, level_var, slope_var, y(0), options.diffuse);
      const Matrix states = simulation_smoother(model, y, rng);
      const TrendVarianceDraw tv = draw_trend_variances(states, priors, rng);

      const Vector y_tilde = y - states.col(0);
      stats.Yty.noalias() = Y.transpose() * y_tilde;
      stats.yty = y_tilde.squaredNorm();
      SpikeSlabDraw ss = spike_slab_gibbs_step(stats, priors, std::move(kappa), rng);

      level_var = tv.level_var;
      slope_var = tv.slope_var;
      obs_var = ss.obs_var;
      weights = ss.weights;
      kappa = ss.kappa;

      BstsDraw d;
      d.level_var = level_var;
      d.slope_var = slope_var;
      d.obs_var = obs_var;
      d.kappa = kappa;
      d.weights = weights;
      d.final_state = states.row(n - 1).transpose();
      if (options.keep_states) d.states = states;
      d.a1 = tv.a1;
      d.c1 = tv.c1;
      d.d1 = tv.d1;
      d.e1 = tv.e1;
      d.s1 = ss.s1;
      d.r1 = ss.r1;
      if (it >= options.burn_in) post.fitted_pre += states.col(0) + Y * weights;
      post.draws.push_back(std::move(d));
    } catch (const NumericalError& e) {
      throw NumericalError("bsts gibbs iteration " + std::to_string(it + 1) + ": " + e.what());
    }
  }
  post.fitted_pre /= static_cast<double>(options.iterations - options.burn_in);
  return post;
}

Matrix predict_paths(const BstsPosterior& posterior, const Panel& panel, RngStream& rng) {
  const Matrix Yh = panel.controls_post();
  const Index H = Yh.rows();
  const auto kept = posterior.retained();
  if (kept == 0) throw InputError("bsts: no retained draws to predict from");
  if (posterior.draws.front().weights.size() != panel.units())
    throw InputError("bsts: posterior and panel control counts differ");
  Matrix paths(static_cast<Index>(kept), H);
  for (std::size_t r = 0; r < kept; ++r) {
    const BstsDraw& d = posterior.draws[static_cast<std::size_t>(posterior.burn_in) + r];
    const double sd_level = std::sqrt(d.level_var);
    const double sd_slope = std::sqrt(d.slope_var);
    const double sd_obs = std::sqrt(d.obs_var);
    double level = d.final_state(0);
    double slope = d.final_state(1);
    for (Index h = 0; h < H; ++h) {
      const double e1 = rng.normal();
      const double e2 = rng.normal();
      level = level + slope + sd_level * e1;
      slope = slope + sd_slope * e2;
      paths(static_cast<Index>(r), h) = level + Yh.row(h).dot(d.weights) + sd_obs * rng.normal();
    }
  }
  return paths;
}

PathSummary summarize_paths(const Matrix& paths, double coverage) {
  if (paths.rows() < 1) throw InputError("no paths to summarize");
  if (!(coverage > 0.0 && coverage < 1.0)) throw InputError("coverage must lie in (0, 1)");
  PathSummary s;
  const Index H = paths.cols();
  s.mean = paths.colwise().mean().transpose();
  s.lower.resize(H);
  s.upper.resize(H);
  const double tail = 0.5 * (1.0 - coverage);
  std::vector<double> col(static_cast<std::size_t>(paths.rows()));
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(col.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, col.size() - 1);
    return col[lo] + (pos - static_cast<double>(lo)) * (col[hi] - col[lo]);
  };
  for (Index h = 0; h < H; ++h) {
    for (Index r = 0; r < paths.rows(); ++r) col[static_cast<std::size_t>(r)] = paths(r, h);
    std::sort(col.begin(), col.end());
    s.lower(h) = quantile(tail);
    s.upper(h) = quantile(1.0 - tail);
  }
  return s;
}

Vector inclusion_frequencies(const BstsPosterior& posterior) {
  const auto kept = posterior.retained();
  if (kept == 0 || posterior.draws.empty()) return {};
  const auto J = static_cast<Index>(posterior.draws.front().kappa.size());
  Vector f = Vector::Zero(J);
  for (std::size_t r = static_cast<std::size_t>(posterior.burn_in); r < posterior.draws.size(); ++r)
    for (Index j = 0; j < J; ++j) f(j) += posterior.draws[r].kappa[static_cast<std::size_t>(j)];
  return f / static_cast<double>(kept);
}

Vector posterior_mean_weights(const BstsPosterior& posterior) {
  const auto kept = posterior.retained();
  if (kept == 0 || posterior.draws.empty()) return {};
  Vector w = Vector::Zero(posterior.draws.front().weights.size());
  for (std::size_t r = static_cast<std::size_t>(posterior.burn_in); r < posterior.draws.size(); ++r)
    w += posterior.draws[r].weights;
  return w / static_cast<double>(kept);
}

}  // namespace synthctl
