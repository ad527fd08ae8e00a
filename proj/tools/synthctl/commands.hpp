#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthctl/estimator.hpp"
#include "synthctl/inference.hpp"
#include "synthctl/simulation.hpp"

namespace synthctl::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

enum class Command { Estimate, Placebo, Simulate };

std::string to_string(Command c);

struct RunConfig {
  Command command = Command::Estimate;

  // estimate / placebo
  std::filesystem::path input;
  std::string treated_col;
  Index t0 = 0;
  std::string method = "adh";  // "lasso,cv" is accepted as shorthand for --cv
  bool cv = false;
  std::optional<double> lambda;
  std::optional<Index> components;
  std::optional<Index> matches;
  std::optional<double> zeta;
  std::optional<double> cutoff;
  std::filesystem::path distances;  // unit,distance CSV for spatial weights
  Index folds = 0;
  bool scale = false;
  bool blocked_cv = false;
  bool invert_prior = false;
  std::string statistic = "cumulative";  // or horizon:H

  // simulate
  std::string scenario;
  Index reps = 100;
  std::vector<std::string> methods{"mdd", "adh", "pcr", "lasso", "bsts"};

  // BSTS chain length (estimate, placebo, simulate)
  int iters = 5000;
  int burn_in = 1000;

  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path out;
};

/// Method, flags and hyperparameters resolved into an estimator spec.
/// Throws InputError for flags that do not apply to the method.
MethodSpec resolve_method(const RunConfig& config, const Panel* panel = nullptr);

EffectStatistic parse_statistic(const std::string& text);

/// Echo of every resolved parameter, defaults included.
nlohmann::json config_echo(const RunConfig& config);

/// Files produced by a command, written together by `commit`.
struct OutputSet {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
  /// Writes every file under `dir`; on failure removes what was written.
  void commit(const std::filesystem::path& dir) const;
};

OutputSet cmd_estimate(const RunConfig& config);
OutputSet cmd_placebo(const RunConfig& config);
OutputSet cmd_simulate(const RunConfig& config);

/// Runs the command and writes its outputs. Returns the process exit code:
/// 0 success, 1 input error, 2 numerical failure. Diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& err);

}  // namespace synthctl::cli
