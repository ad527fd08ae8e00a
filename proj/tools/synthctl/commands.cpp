#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "synthctl/io.hpp"

namespace synthctl::cli {

namespace {

using nlohmann::json;

// Runs one stage of a command and prefixes its errors with the stage name.
template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError(name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(name + ": " + e.what());
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

Vector load_distances(const std::filesystem::path& path, const Panel& panel) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open distances file '" + path.string() + "'");
  std::map<std::string, double> by_unit;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 'unit,distance'");
    const std::string unit = trim(line.substr(0, comma));
    const auto value = parse_double(trim(line.substr(comma + 1)));
    if (!value) {
      if (lineno == 1) continue;  // header
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": distance is not a number");
    }
    by_unit[unit] = *value;
  }
  Vector a(panel.units());
  for (Index j = 0; j < panel.units(); ++j) {
    const auto& name = panel.unit_names()[static_cast<std::size_t>(j)];
    const auto it = by_unit.find(name);
    if (it == by_unit.end()) throw InputError("distances file has no entry for control '" + name + "'");
    a(j) = it->second;
  }
  return a;
}

Panel load(const RunConfig& config) {
  if (config.input.empty()) throw InputError("--input is required");
  if (config.treated_col.empty()) throw InputError("--treated-col is required");
  if (config.t0 < 1) throw InputError("--t0 is required and must be >= 1");
  return load_panel_csv(config.input, config.treated_col, config.t0);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json method_echo(const MethodSpec& s) {
  json j;
  j["method"] = to_string(s.method);
  j["cv"] = s.cv || (s.method == Method::LASSO && !s.lambda);
  j["lambda"] = s.lambda ? json(*s.lambda) : json(nullptr);
  j["components"] = s.components ? json(*s.components) : json(nullptr);
  j["matches"] = s.matches;
  j["zeta"] = s.distances.zeta;
  j["cutoff"] = std::isfinite(s.distances.cutoff) ? json(s.distances.cutoff) : json("inf");
  j["intercept"] = s.intercept;
  j["folds"] = s.folds;
  j["grid_size"] = s.grid_size;
  j["blocked_cv"] = s.cv_options.blocked;
  j["standardize"] = s.scaling.standardize;
  j["lasso_max_sweeps"] = s.cv_options.lasso.max_sweeps;
  j["lasso_tolerance"] = s.cv_options.lasso.tolerance;
  j["bsts_iterations"] = s.bsts.iterations;
  j["bsts_burn_in"] = s.bsts.burn_in;
  j["invert_prior"] = s.invert_prior;
  j["expected_r2"] = s.expected_r2;
  j["prior_inclusion"] = s.prior_inclusion;
  return j;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Estimate: return "estimate";
    case Command::Placebo: return "placebo";
    case Command::Simulate: return "simulate";
  }
  return "?";
}

MethodSpec resolve_method(const RunConfig& config, const Panel* panel) {
  std::string name = lower(trim(config.method));
  bool cv = config.cv;
  if (const auto comma = name.find(','); comma != std::string::npos) {
    const std::string suffix = trim(name.substr(comma + 1));
    if (suffix != "cv") throw InputError("unknown method modifier '" + suffix + "' (only ',cv' is accepted)");
    cv = true;
    name = trim(name.substr(0, comma));
  }
  MethodSpec s = MethodSpec::of(parse_method(name));
  const Method m = s.method;

  auto only_for = [&](bool given, bool allowed, const char* flag) {
    if (given && !allowed) throw InputError(std::string(flag) + " does not apply to method '" + name + "'");
  };
  only_for(cv && !config.lambda, m == Method::LASSO || m == Method::PCR, "--cv");
  only_for(config.lambda.has_value(), m == Method::LASSO, "--lambda");
  only_for(config.components.has_value(), m == Method::PCR, "--components");
  only_for(config.matches.has_value(), m == Method::MDD, "--matches");
  only_for(config.zeta.has_value() || config.cutoff.has_value() || !config.distances.empty(),
           m == Method::SPATIAL, "--zeta/--cutoff/--distances");
  only_for(config.invert_prior, m == Method::BSTS, "--invert-prior");
  if (cv && (config.lambda || config.components))
    throw InputError("--cv cannot be combined with a fixed --lambda or --components");

  s.cv = cv;
  if (config.lambda) {
    if (!(*config.lambda >= 0.0)) throw InputError("--lambda must be >= 0");
    s.lambda = config.lambda;
    s.cv = false;
  }
  if (config.components) {
    if (*config.components < 1) throw InputError("--components must be >= 1");
    s.components = config.components;
  }
  if (config.matches) {
    if (*config.matches < 1) throw InputError("--matches must be >= 1");
    s.matches = *config.matches;
  }
  if (config.folds != 0 && config.folds < 2) throw InputError("--folds must be >= 2");
  s.folds = config.folds;
  s.scaling.standardize = config.scale;
  s.cv_options.blocked = config.blocked_cv;
  s.cv_options.scaling = s.scaling;
  if (config.iters < 1) throw InputError("--iters must be >= 1");
  if (config.burn_in < 0 || config.burn_in >= config.iters) throw InputError("--burn-in must lie in [0, iters)");
  s.bsts.iterations = config.iters;
  s.bsts.burn_in = config.burn_in;
  s.invert_prior = config.invert_prior;

  if (m == Method::SPATIAL) {
    s.distances.zeta = config.zeta.value_or(1.0);
    s.distances.cutoff = config.cutoff.value_or(std::numeric_limits<double>::infinity());
    if (config.distances.empty()) throw InputError("spatial weights need --distances (unit,distance CSV)");
    if (panel) s.distances.a = load_distances(config.distances, *panel);
  }
  return s;
}

EffectStatistic parse_statistic(const std::string& text) {
  const std::string t = lower(trim(text));
  EffectStatistic s;
  if (t == "cumulative") return s;
  if (t.rfind("horizon:", 0) == 0) {
    const std::string h = t.substr(8);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(h.data(), h.data() + h.size(), v);
    if (ec == std::errc{} && ptr == h.data() + h.size() && v >= 1) {
      s.kind = EffectStatistic::Kind::Horizon;
      s.horizon = static_cast<Index>(v);
      return s;
    }
  }
  throw InputError("unknown statistic '" + text + "' (expected cumulative or horizon:H)");
}

json config_echo(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed;
  if (c.command == Command::Simulate) {
    j["scenario"] = c.scenario;
    j["reps"] = c.reps;
    j["methods"] = c.methods;
    j["bsts_iterations"] = c.iters;
    j["bsts_burn_in"] = c.burn_in;
    j["standardize"] = c.scale;
    j["blocked_cv"] = c.blocked_cv;
    return j;
  }
  j["input"] = c.input.string();
  j["treated_col"] = c.treated_col;
  j["t0"] = c.t0;
  j["method_flag"] = c.method;
  j["distances"] = c.distances.empty() ? json(nullptr) : json(c.distances.string());
  j["resolved"] = method_echo(resolve_method(c));
  if (c.command == Command::Placebo) j["statistic"] = parse_statistic(c.statistic).describe();
  return j;
}

void OutputSet::commit(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  if (dir.empty()) throw InputError("--out is required");
  std::error_code ec;
  const bool existed = fs::exists(dir, ec);
  if (!existed && !fs::create_directories(dir, ec))
    throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<fs::path> written;
  bool fresh = false;
  try {
    for (const auto& [name, content] : files) {
      fresh = !fs::exists(dir / name, ec);
      write_file(dir / name, content);
      written.push_back(dir / name);
    }
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    if (fresh) fs::remove(dir / files[written.size()].first, ec);
    if (!existed) fs::remove(dir, ec);
    throw;
  }
}

OutputSet cmd_estimate(const RunConfig& config) {
  const Panel panel = stage("loading panel", [&] { return load(config); });
  const MethodSpec spec = stage("resolving method", [&] { return resolve_method(config, &panel); });
  RngStream rng(config.seed);
  const Estimate est = stage("fitting " + to_string(spec.method), [&] { return estimate(panel, spec, rng); });
  const EffectSeries eff = effect_series(panel.treated_post(), est.counterfactual, spec.method);

  OutputSet out;
  out.add("counterfactual.csv", counterfactual_csv(panel, est));
  out.add("effects.csv", effects_csv(panel, eff));
  out.add("weights.csv", weights_csv(panel, est.fit));
  out.add("fit.json", dump(to_json(est, panel)));
  out.add("config.json", dump(config_echo(config)));
  return out;
}

OutputSet cmd_placebo(const RunConfig& config) {
  const Panel panel = stage("loading panel", [&] { return load(config); });
  const MethodSpec spec = stage("resolving method", [&] {
    MethodSpec s = resolve_method(config, &panel);
    if (s.method == Method::SPATIAL)
      throw InputError("spatial weights need distances for every placebo unit; not supported in placebo runs");
    return s;
  });
  const EffectStatistic stat = stage("resolving statistic", [&] { return parse_statistic(config.statistic); });
  RngStream rng(config.seed);
  const PlaceboResult res = stage("placebo study", [&] { return placebo_study(panel, spec, stat, rng); });

  json summary = to_json(res);
  summary["method"] = to_string(spec.method);
  summary["treated"] = panel.treated_name();
  OutputSet out;
  out.add("placebo.csv", placebo_csv(res));
  out.add("summary.json", dump(summary));
  out.add("config.json", dump(config_echo(config)));
  return out;
}

OutputSet cmd_simulate(const RunConfig& config) {
  const auto [spec, runs] = stage("resolving scenario", [&] {
    if (config.scenario.empty()) throw InputError("--scenario is required");
    ScenarioSpec s = make_scenario(parse_scenario(config.scenario), config.seed);
    if (config.reps < 2) throw InputError("--reps must be >= 2");
    if (config.methods.empty()) throw InputError("--methods needs at least one method");
    if (config.iters < 1 || config.burn_in < 0 || config.burn_in >= config.iters)
      throw InputError("--iters/--burn-in must satisfy 0 <= burn-in < iters");
    std::vector<MethodRun> rs;
    for (const auto& label : config.methods) {
      MethodRun r = method_run(trim(label));
      r.spec.bsts.iterations = config.iters;
      r.spec.bsts.burn_in = config.burn_in;
      r.spec.scaling.standardize = config.scale;
      r.spec.cv_options.scaling = r.spec.scaling;
      r.spec.cv_options.blocked = config.blocked_cv;
      rs.push_back(std::move(r));
    }
    return std::pair{s, rs};
  });
  const ScenarioReport report = stage("simulating", [&] { return monte_carlo(spec, runs, config.reps); });

  OutputSet out;
  out.add("report.csv", report_csv(report));
  out.add("report.json", dump(to_json(report)));
  out.add("config.json", dump(config_echo(config)));
  return out;
}

int run(const RunConfig& config, std::ostream& err) {
  const std::string prog = "synthctl " + to_string(config.command);
  try {
    OutputSet files;
    switch (config.command) {
      case Command::Estimate: files = cmd_estimate(config); break;
      case Command::Placebo: files = cmd_placebo(config); break;
      case Command::Simulate: files = cmd_simulate(config); break;
    }
    stage("writing outputs", [&] {
      files.commit(config.out);
      return 0;
    });
    return 0;
  } catch (const InputError& e) {
    err << prog << ": error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << prog << ": numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << prog << ": internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace synthctl::cli
