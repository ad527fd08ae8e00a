#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthctl/estimator.hpp"
#include "synthctl/inference.hpp"

namespace synthctl {

enum class Scenario { A, B, C, D, E, F, FIG1 };

std::string to_string(Scenario s);
/// Case-insensitive; throws InputError on unknown tags.
Scenario parse_scenario(const std::string& tag);

/// Unit trend u_j * (base + slope * t) on top of the common trend.
struct UnitTrend {
  double base = 3.0;
  double slope = 0.0;
};

/// y_jt(0) = common_slope * t + u_j (base_j + slope_j t) + psi_jt + e_jt,
/// psi_jt = amplitude sin(2 pi t / P_j) + N(0, season_noise^2),
/// y_0t(0) = sum_j w_j (xi_jt + psi_jt) + e_0t, or sum_j w_j y_jt(0) + e_0t
/// when `treated_from_observed`.
struct ScenarioSpec {
  Scenario scenario = Scenario::C;
  Index t0 = 100;
  Index periods = 110;
  Index units = 150;
  double effect = 20.0;
  Vector weights;  // true weights of the first weights.size() (relevant) units
  double common_slope = 0.1;
  UnitTrend relevant_trend{0.0, 0.1};
  UnitTrend irrelevant_trend{3.0, 0.0};
  bool seasonality = true;
  double season_amplitude = 2.0;
  double relevant_period = 24.0;
  double irrelevant_period = 8.0;
  double season_noise = 0.1;
  double noise_sd = 1.0;
  double t_dof = 0.0;  // > 0 adds Student-t(t_dof) noise to every unit
  bool treated_from_observed = false;
  double offset_low = 1.0;
  double offset_high = 100.0;
  std::vector<double> fixed_offsets{13.2, 43.9};  // leading units; the rest are drawn
  Vector offsets;      // resolved u_j, length J
  std::uint64_t seed = 0;
};

/// Built-in spec for a scenario; offsets resolved from `seed` and held fixed
/// across replications.
ScenarioSpec make_scenario(Scenario scenario, std::uint64_t seed);

/// Draws offsets for units without a fixed value.
void resolve_offsets(ScenarioSpec& spec);

struct GeneratedPanel {
  Panel panel;
  Vector truth;  // y_0h(0) for the post periods
};

GeneratedPanel generate(const ScenarioSpec& spec, RngStream& rng);

struct MethodRun {
  std::string label;
  MethodSpec spec;
};

/// Default method set for a scenario run: label -> spec (mdd, adh, pcr, lasso, bsts, ols).
MethodRun method_run(const std::string& label);

struct MethodSummary {
  std::string label;
  Method method = Method::ADH;
  double mean = 0.0;      // mean effect at T0 + 1
  double std = 0.0;       // population std of that effect
  double sum = 0.0;       // mean cumulative effect over the post period
  double controls = 0.0;  // mean count of |w_j| > 0.01
  BiasVariance bv;
  double in_sample_rmse = 0.0;
  double out_of_sample_rmse = 0.0;
  Index failures = 0;
  bool valid = true;
  std::vector<double> first_effect;  // per replication, NaN when the fit failed
  std::vector<double> in_rmse;
  std::vector<double> out_rmse;
  std::vector<double> active;
  std::vector<std::string> errors;
};

struct ScenarioReport {
  ScenarioSpec spec;
  Index reps = 0;
  std::vector<MethodSummary> rows;
};

inline constexpr double kActiveWeightThreshold = 0.01;

/// Replication r uses data substream r; every method sees the same panels.
ScenarioReport monte_carlo(const ScenarioSpec& spec, const std::vector<MethodRun>& methods, Index reps);

}  // namespace synthctl
