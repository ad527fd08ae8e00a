#pragma once

#include <string>
#include <vector>

#include "synthctl/estimator.hpp"

namespace synthctl {

struct EffectSeries {
  Method method = Method::ADH;
  Vector effects;     // observed - counterfactual, per post period
  Vector cumulative;  // running sum of effects
};

EffectSeries effect_series(const Vector& observed_post, const Vector& counterfactual,
                           Method method = Method::ADH);

struct EffectStatistic {
  enum class Kind { Cumulative, Horizon };
  Kind kind = Kind::Cumulative;
  Index horizon = 1;  // 1-based post period for Kind::Horizon

  std::string describe() const;
};

double statistic(const EffectSeries& series, const EffectStatistic& stat);

struct PlaceboEntry {
  Index unit = 0;
  std::string name;
  double statistic = 0.0;
};

struct PlaceboFailure {
  Index unit = 0;
  std::string name;
  std::string message;
};

struct PlaceboResult {
  EffectStatistic stat;
  double original = 0.0;
  std::vector<PlaceboEntry> placebos;  // eligible runs, in unit order
  std::vector<PlaceboFailure> failures;
  Index rank = 0;      // placebos with |statistic| > |original|
  Index eligible = 0;

  double ratio() const { return eligible > 0 ? static_cast<double>(rank) / static_cast<double>(eligible) : 0.0; }
  /// Fewer than `threshold` of the placebos show a larger effect.
  bool robust(double threshold = 0.1) const { return eligible > 0 && ratio() < threshold; }
};

/// Re-runs `spec` with every control promoted to treated (the remaining J-1
/// controls as donors). Failed placebo fits are recorded, not fatal.
PlaceboResult placebo_study(const Panel& panel, const MethodSpec& spec, const EffectStatistic& stat,
                            RngStream& rng);

struct BiasVariance {
  double mse = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;  // population (1/n) variance
  Index n = 0;
};

BiasVariance bias_variance(const std::vector<double>& estimates, double truth);

}  // namespace synthctl
