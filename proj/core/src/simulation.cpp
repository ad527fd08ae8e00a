#include "synthctl/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "synthctl/parallel.hpp"

namespace synthctl {

namespace {

constexpr std::uint64_t kOffsetStream = 0x6f66667365747300ULL;
constexpr std::uint64_t kDataStream = 0x6461746100000000ULL;
constexpr std::uint64_t kMethodStream = 0x6d6574686f640000ULL;

double rmse(const Vector& a, const Vector& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
    case Scenario::D: return "D";
    case Scenario::E: return "E";
    case Scenario::F: return "F";
    case Scenario::FIG1: return "FIG1";
  }
  return "?";
}

Scenario parse_scenario(const std::string& tag) {
  std::string upper(tag);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Scenario s : {Scenario::A, Scenario::B, Scenario::C, Scenario::D, Scenario::E, Scenario::F, Scenario::FIG1})
    if (to_string(s) == upper) return s;
  throw InputError("unknown scenario '" + tag + "' (expected A, B, C, D, E, F or FIG1)");
}

ScenarioSpec make_scenario(Scenario scenario, std::uint64_t seed) {
  ScenarioSpec s;
  s.scenario = scenario;
  s.seed = seed;
  s.weights = Vector(2);
  s.weights << 0.7, 0.3;
  switch (scenario) {
    case Scenario::A:
      s.relevant_trend = {3.0, 0.0};
      s.seasonality = false;
      break;
    case Scenario::B:
      s.relevant_trend = {3.0, 0.0};
      break;
    case Scenario::C:
      break;
    case Scenario::D:
      s.weights << 1.5, -0.5;
      break;
    case Scenario::E:
      s.weights << 1.5, -0.5;
      s.relevant_trend = {1.0, 0.1};
      s.irrelevant_trend = {1.0, 0.08};
      s.irrelevant_period = s.relevant_period;
      s.noise_sd = 5.0;
      break;
    case Scenario::F:
      s.t0 = 10;
      s.periods = 20;
      s.t_dof = 0.99;
      break;
    case Scenario::FIG1:
      s.t0 = 200;
      s.periods = 220;
      s.units = 180;
      s.weights = Vector(3);
      s.weights << 0.3, 0.7, -0.01;
      s.treated_from_observed = true;
      break;
  }
  resolve_offsets(s);
  return s;
}

void resolve_offsets(ScenarioSpec& spec) {
  if (spec.units < 1) throw InputError("scenario needs at least one control unit");
  if (!(spec.offset_high >= spec.offset_low)) throw InputError("scenario offset range is empty");
  RngStream rng(spec.seed, kOffsetStream);
  spec.offsets.resize(spec.units);
  for (Index j = 0; j < spec.units; ++j) {
    const double drawn = rng.uniform(spec.offset_low, spec.offset_high);
    spec.offsets(j) = static_cast<std::size_t>(j) < spec.fixed_offsets.size()
                          ? spec.fixed_offsets[static_cast<std::size_t>(j)]
                          : drawn;
  }
}

GeneratedPanel generate(const ScenarioSpec& spec, RngStream& rng) {
  const Index T = spec.periods;
  const Index J = spec.units;
  const Index R = spec.weights.size();
  if (spec.t0 < 1 || spec.t0 >= T) throw InputError("scenario needs 1 <= T0 < T");
  if (R < 1 || R > J) throw InputError("scenario weights must cover 1..J relevant units");
  if (spec.offsets.size() != J) throw InputError("scenario offsets are not resolved (call resolve_offsets)");
  if (!(spec.noise_sd >= 0.0) || !(spec.season_noise >= 0.0)) throw InputError("scenario noise must be >= 0");
  if (spec.seasonality && !(spec.relevant_period > 0.0 && spec.irrelevant_period > 0.0))
    throw InputError("seasonal periods must be positive");

  Matrix signal(T, J);  // xi_jt + psi_jt
  Matrix controls(T, J);
  for (Index j = 0; j < J; ++j) {
    const bool relevant = j < R;
    const UnitTrend& tr = relevant ? spec.relevant_trend : spec.irrelevant_trend;
    const double period = relevant ? spec.relevant_period : spec.irrelevant_period;
    for (Index i = 0; i < T; ++i) {
      const double t = static_cast<double>(i + 1);
      double value = spec.common_slope * t + spec.offsets(j) * (tr.base + tr.slope * t);
      if (spec.seasonality)
        value += spec.season_amplitude * std::sin(2.0 * std::numbers::pi * t / period) +
                 spec.season_noise * rng.normal();
      signal(i, j) = value;
      double noise = spec.noise_sd * rng.normal();
      if (spec.t_dof > 0.0) noise += draw_student_t(spec.t_dof, rng);
      controls(i, j) = value + noise;
    }
  }

  Vector y0(T);
  for (Index i = 0; i < T; ++i) {
    double noise = spec.noise_sd * rng.normal();
    if (spec.t_dof > 0.0) noise += draw_student_t(spec.t_dof, rng);
    const auto& base = spec.treated_from_observed ? controls : signal;
    y0(i) = base.row(i).head(R).dot(spec.weights) + noise;
  }

  Vector observed = y0;
  observed.tail(T - spec.t0).array() += spec.effect;

  std::vector<std::string> labels;
  std::vector<std::string> names;
  for (Index i = 0; i < T; ++i) labels.push_back(std::to_string(i + 1));
  for (Index j = 0; j < J; ++j) names.push_back("unit" + std::to_string(j + 1));
  return {Panel(std::move(labels), std::move(observed), std::move(controls), spec.t0, std::move(names)),
          y0.tail(T - spec.t0)};
}

MethodRun method_run(const std::string& label) {
  std::string lower(label);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "pcr-cv") {
    MethodSpec s = MethodSpec::of(Method::PCR);
    s.cv = true;
    return {lower, s};
  }
  return {lower, MethodSpec::of(parse_method(lower))};
}

ScenarioReport monte_carlo(const ScenarioSpec& spec, const std::vector<MethodRun>& methods, Index reps) {
  if (reps < 2) throw InputError("monte carlo needs reps >= 2");
  if (methods.empty()) throw InputError("monte carlo needs at least one method");
  const auto M = methods.size();
  const auto R = static_cast<std::size_t>(reps);

  struct Cell {
    double first = std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    double in_rmse = 0.0;
    double out_rmse = 0.0;
    double active = 0.0;
    std::string error;
  };
  std::vector<std::vector<Cell>> cells(R, std::vector<Cell>(M));

  parallel_for(R, [&](std::size_t r) {
    RngStream data_rng = RngStream(spec.seed, kDataStream).substream(r);
    const GeneratedPanel g = generate(spec, data_rng);
    const RngStream method_root = RngStream(spec.seed, kMethodStream).substream(r);
    for (std::size_t m = 0; m < M; ++m) {
      Cell& c = cells[r][m];
      try {
        RngStream mrng = method_root.substream(m);
        const Estimate est = estimate(g.panel, methods[m].spec, mrng);
        const EffectSeries eff = effect_series(g.panel.treated_post(), est.counterfactual, methods[m].spec.method);
        c.first = eff.effects(0);
        c.total = eff.cumulative(eff.cumulative.size() - 1);
        c.in_rmse = rmse(est.fit.fitted_pre, g.panel.treated_pre());
        c.out_rmse = rmse(est.counterfactual, g.truth);
        c.active = static_cast<double>((est.fit.weights.array().abs() > kActiveWeightThreshold).count());
      } catch (const std::exception& e) {
        c.first = std::numeric_limits<double>::quiet_NaN();
        c.error = "rep " + std::to_string(r) + ": " + e.what();
      }
    }
  });

  ScenarioReport report;
  report.spec = spec;
  report.reps = reps;
  for (std::size_t m = 0; m < M; ++m) {
    MethodSummary row;
    row.label = methods[m].label;
    row.method = methods[m].spec.method;
    std::vector<double> ok;
    double total = 0.0, in = 0.0, out = 0.0, active = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const Cell& c = cells[r][m];
      row.first_effect.push_back(c.first);
      if (!c.error.empty()) {
        ++row.failures;
        row.errors.push_back(c.error);
        row.in_rmse.push_back(std::numeric_limits<double>::quiet_NaN());
        row.out_rmse.push_back(std::numeric_limits<double>::quiet_NaN());
        row.active.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      ok.push_back(c.first);
      total += c.total;
      in += c.in_rmse;
      out += c.out_rmse;
      active += c.active;
      row.in_rmse.push_back(c.in_rmse);
      row.out_rmse.push_back(c.out_rmse);
      row.active.push_back(c.active);
    }
    row.valid = static_cast<double>(row.failures) <= 0.05 * static_cast<double>(reps) && ok.size() >= 2;
    if (ok.size() >= 2) {
      const double n = static_cast<double>(ok.size());
      row.bv = bias_variance(ok, spec.effect);
      row.mean = 0.0;
      for (double v : ok) row.mean += v;
      row.mean /= n;
      row.std = std::sqrt(row.bv.variance);
      row.sum = total / n;
      row.in_sample_rmse = in / n;
      row.out_of_sample_rmse = out / n;
      row.controls = active / n;
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.mean = row.std = row.sum = row.controls = row.in_sample_rmse = row.out_of_sample_rmse = nan;
      row.bv.mse = row.bv.bias_sq = row.bv.variance = nan;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace synthctl
