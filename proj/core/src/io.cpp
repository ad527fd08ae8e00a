#include "synthctl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace synthctl {

using nlohmann::json;

namespace {

json vec(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json weights_by_unit(const Vector& w, const std::vector<std::string>& names) {
  json o = json::object();
  for (Index j = 0; j < w.size(); ++j) o[names[static_cast<std::size_t>(j)]] = w(j);
  return o;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_fixed(double x, int decimals) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, decimals);
  return std::string(buf, ptr);
}

json to_json(const Fit& fit, const std::vector<std::string>& unit_names) {
  json j;
  j["method"] = to_string(fit.method);
  j["alpha"] = fit.alpha;
  j["hyperparams"] = fit.hyperparams;
  j["scaled"] = fit.scaled;
  j["iterations"] = fit.iterations;
  j["weights"] = weights_by_unit(fit.weights, unit_names);
  j["fitted_pre"] = vec(fit.fitted_pre);
  return j;
}

json to_json(const CvResult& cv) {
  json j;
  j["method"] = to_string(cv.method);
  j["grid"] = cv.grid;
  j["cv_curve"] = cv.cv_curve;
  j["chosen"] = cv.chosen;
  j["chosen_index"] = cv.chosen_index;
  j["folds"] = cv.k;
  j["blocked"] = cv.blocked;
  j["seed"] = cv.seed;
  j["fold_assignment"] = cv.fold_assignment;
  j["warnings"] = cv.warnings;
  return j;
}

json to_json(const BstsSummary& bsts, const std::vector<std::string>& unit_names) {
  json j;
  j["iterations"] = bsts.iterations;
  j["burn_in"] = bsts.burn_in;
  j["retained_draws"] = bsts.predicted_paths.rows();
  j["prior_covariance"] = bsts.prior_inverted ? "inverted template (precision)" : "template as covariance";
  j["inclusion_frequencies"] = weights_by_unit(bsts.inclusion, unit_names);
  j["path_mean"] = vec(bsts.paths.mean);
  j["path_lower_95"] = vec(bsts.paths.lower);
  j["path_upper_95"] = vec(bsts.paths.upper);
  return j;
}

json to_json(const Estimate& est, const Panel& panel) {
  json j = to_json(est.fit, panel.unit_names());
  if (est.cv) j["cv"] = to_json(*est.cv);
  if (est.bsts) j["bsts"] = to_json(*est.bsts, panel.unit_names());
  j["treated"] = panel.treated_name();
  j["t0"] = panel.t0();
  j["periods"] = panel.periods();
  j["units"] = panel.units();
  return j;
}

json to_json(const ScenarioSpec& s) {
  json j;
  j["scenario"] = to_string(s.scenario);
  j["t0"] = s.t0;
  j["periods"] = s.periods;
  j["units"] = s.units;
  j["effect"] = s.effect;
  j["weights"] = vec(s.weights);
  j["common_slope"] = s.common_slope;
  j["relevant_trend"] = {{"base", s.relevant_trend.base}, {"slope", s.relevant_trend.slope}};
  j["irrelevant_trend"] = {{"base", s.irrelevant_trend.base}, {"slope", s.irrelevant_trend.slope}};
  j["seasonality"] = s.seasonality;
  j["season_amplitude"] = s.season_amplitude;
  j["relevant_period"] = s.relevant_period;
  j["irrelevant_period"] = s.irrelevant_period;
  j["season_noise"] = s.season_noise;
  j["noise_sd"] = s.noise_sd;
  j["t_dof"] = s.t_dof;
  j["treated_from_observed"] = s.treated_from_observed;
  j["offset_range"] = {s.offset_low, s.offset_high};
  j["fixed_offsets"] = s.fixed_offsets;
  j["offsets"] = vec(s.offsets);
  j["active_weight_threshold"] = kActiveWeightThreshold;
  j["seed"] = s.seed;
  return j;
}

json to_json(const ScenarioReport& report) {
  json j;
  j["spec"] = to_json(report.spec);
  j["reps"] = report.reps;
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["method"] = r.label;
    row["mean"] = r.mean;
    row["std"] = r.std;
    row["sum"] = r.sum;
    row["controls"] = r.controls;
    row["mse"] = r.bv.mse;
    row["bias_sq"] = r.bv.bias_sq;
    row["variance"] = r.bv.variance;
    row["in_sample_rmse"] = r.in_sample_rmse;
    row["out_of_sample_rmse"] = r.out_of_sample_rmse;
    row["failures"] = r.failures;
    row["valid"] = r.valid;
    row["errors"] = r.errors;
    row["first_effect"] = r.first_effect;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

json to_json(const PlaceboResult& r) {
  json j;
  j["statistic"] = r.stat.describe();
  j["original"] = r.original;
  j["rank"] = r.rank;
  j["eligible"] = r.eligible;
  j["ratio"] = format_fixed(r.ratio(), 3);
  j["robust_10pct"] = r.robust(0.1);
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"unit", f.name}, {"error", f.message}});
  j["failures"] = std::move(failures);
  return j;
}

std::string counterfactual_csv(const Panel& panel, const Estimate& est) {
  std::ostringstream out;
  out << "time,observed,counterfactual,effect";
  if (est.bsts) out << ",lower_95,upper_95";
  out << '\n';
  const Vector obs = panel.treated_post();
  for (Index h = 0; h < panel.post_periods(); ++h) {
    out << csv_escape(panel.time_labels()[static_cast<std::size_t>(panel.t0() + h)]) << ','
        << format_number(obs(h)) << ',' << format_number(est.counterfactual(h)) << ','
        << format_number(obs(h) - est.counterfactual(h));
    if (est.bsts)
      out << ',' << format_number(est.bsts->paths.lower(h)) << ',' << format_number(est.bsts->paths.upper(h));
    out << '\n';
  }
  return out.str();
}

std::string effects_csv(const Panel& panel, const EffectSeries& effects) {
  std::ostringstream out;
  out << "time,effect,cumulative\n";
  for (Index h = 0; h < effects.effects.size(); ++h)
    out << csv_escape(panel.time_labels()[static_cast<std::size_t>(panel.t0() + h)]) << ','
        << format_number(effects.effects(h)) << ',' << format_number(effects.cumulative(h)) << '\n';
  return out.str();
}

std::string weights_csv(const Panel& panel, const Fit& fit) {
  std::vector<Index> order(static_cast<std::size_t>(fit.weights.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(fit.weights(a)) > std::abs(fit.weights(b)); });
  std::ostringstream out;
  out << "unit,weight\n";
  for (Index j : order)
    out << csv_escape(panel.unit_names()[static_cast<std::size_t>(j)]) << ',' << format_number(fit.weights(j)) << '\n';
  return out.str();
}

std::string placebo_csv(const PlaceboResult& result) {
  std::ostringstream out;
  out << "unit,statistic\n";
  for (const auto& p : result.placebos) out << csv_escape(p.name) << ',' << format_number(p.statistic) << '\n';
  return out.str();
}

std::string report_csv(const ScenarioReport& report) {
  std::ostringstream out;
  out << "method,mean,std,sum,controls,mse,bias_sq,variance,failures,valid\n";
  for (const auto& r : report.rows)
    out << r.label << ',' << format_fixed(r.mean, 4) << ',' << format_fixed(r.std, 4) << ','
        << format_fixed(r.sum, 4) << ',' << format_fixed(r.controls, 4) << ',' << format_fixed(r.bv.mse, 4)
        << ',' << format_fixed(r.bv.bias_sq, 4) << ',' << format_fixed(r.bv.variance, 4) << ','
        << r.failures << ',' << (r.valid ? "true" : "false") << '\n';
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace synthctl
