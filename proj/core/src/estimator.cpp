#include "synthctl/estimator.hpp"

namespace synthctl {

MethodSpec MethodSpec::of(Method m) {
  MethodSpec s;
  s.method = m;
  if (m == Method::LASSO) s.cv = true;
  return s;
}

Estimate estimate(const Panel& panel, const MethodSpec& spec, RngStream& rng) {
  Estimate out;
  const Index folds = spec.folds > 0 ? spec.folds : default_folds(panel.t0());
  if (spec.cv && spec.method != Method::LASSO && spec.method != Method::PCR)
    throw InputError("cross-validation is available for lasso and pcr only");

  switch (spec.method) {
    case Method::OLS:
      out.fit = fit_ols(panel, spec.intercept);
      break;
    case Method::PCR:
      if (spec.cv) {
        RngStream cv_rng = rng.substream(1);
        out.cv = cross_validate(panel, Method::PCR, pcr_grid(panel, folds), folds, cv_rng, spec.cv_options);
        out.fit = fit_pcr(panel, static_cast<Index>(out.cv->chosen), spec.scaling);
      } else {
        out.fit = fit_pcr(panel, spec.components.value_or(5), spec.scaling);
      }
      break;
    case Method::LASSO:
      if (spec.cv || !spec.lambda) {
        RngStream cv_rng = rng.substream(1);
        CvOptions opts = spec.cv_options;
        opts.scaling = spec.scaling;
        out.cv = cross_validate(panel, Method::LASSO, lambda_grid(panel, spec.grid_size), folds, cv_rng, opts);
        out.fit = fit_lasso(panel, out.cv->chosen, spec.scaling, spec.cv_options.lasso);
      } else {
        out.fit = fit_lasso(panel, *spec.lambda, spec.scaling, spec.cv_options.lasso);
      }
      break;
    case Method::ADH:
      out.fit = fit_adh(panel);
      break;
    case Method::MDD:
      out.fit = fit_mdd(panel, spec.matches);
      break;
    case Method::SPATIAL:
      out.fit = fit_spatial(panel, spec.distances);
      break;
    case Method::BSTS: {
      BstsPriors priors = default_priors(panel.controls_pre(), panel.treated_pre(), spec.expected_r2, 0.5,
                                         spec.prior_inclusion);
      priors.template_is_precision = spec.invert_prior;
      RngStream gibbs_rng = rng.substream(2);
      BstsPosterior post = run_gibbs(panel, priors, spec.bsts, gibbs_rng);
      RngStream path_rng = rng.substream(3);
      post.predicted_paths = predict_paths(post, panel, path_rng);

      BstsSummary summary;
      summary.paths = summarize_paths(post.predicted_paths);
      summary.inclusion = inclusion_frequencies(post);
      summary.iterations = spec.bsts.iterations;
      summary.burn_in = spec.bsts.burn_in;
      summary.prior_inverted = spec.invert_prior;

      out.fit.method = Method::BSTS;
      out.fit.alpha = 0.0;
      out.fit.weights = posterior_mean_weights(post);
      out.fit.fitted_pre = post.fitted_pre;
      out.fit.iterations = spec.bsts.iterations;
      out.fit.hyperparams["iterations"] = spec.bsts.iterations;
      out.fit.hyperparams["burn_in"] = spec.bsts.burn_in;
      out.fit.hyperparams["expected_r2"] = spec.expected_r2;
      out.fit.hyperparams["prior_inclusion"] = spec.prior_inclusion;
      out.fit.hyperparams["prior_inverted"] = spec.invert_prior ? 1.0 : 0.0;
      out.counterfactual = summary.paths.mean;
      summary.predicted_paths = std::move(post.predicted_paths);
      out.bsts = std::move(summary);
      return out;
    }
  }
  out.counterfactual = predict(out.fit, panel);
  return out;
}

}  // namespace synthctl
