#pragma once

#include <optional>
#include <string>
#include <vector>

#include "synthctl/bsts.hpp"
#include "synthctl/model_selection.hpp"
#include "synthctl/reduced_form.hpp"

namespace synthctl {

/// Everything needed to run one estimator on a panel.
struct MethodSpec {
  Method method = Method::ADH;
  /// Choose lambda (LASSO) or k (PCR) by cross-validation. LASSO without an
  /// explicit lambda always cross-validates.
  bool cv = false;
  std::optional<double> lambda;
  std::optional<Index> components;  // PCR k; 5 when unset and cv is off
  Index matches = 5;
  DistanceInfo distances;           // SPATIAL only
  bool intercept = true;            // OLS only
  Index folds = 0;                  // 0 selects default_folds(T0)
  Index grid_size = 50;             // lambda grid length
  CvOptions cv_options;
  ScalingOptions scaling;
  BstsOptions bsts;
  bool invert_prior = false;        // BSTS: template is the prior precision
  double expected_r2 = 0.5;
  double prior_inclusion = 0.5;

  static MethodSpec of(Method m);
};

struct BstsSummary {
  PathSummary paths;
  Vector inclusion;  // per control
  int iterations = 0;
  int burn_in = 0;
  bool prior_inverted = false;
  Matrix predicted_paths;
};

struct Estimate {
  Fit fit;
  Vector counterfactual;  // length T - T0
  std::optional<CvResult> cv;
  std::optional<BstsSummary> bsts;
};

/// Fit, optional model selection, and counterfactual prediction.
Estimate estimate(const Panel& panel, const MethodSpec& spec, RngStream& rng);

}  // namespace synthctl
