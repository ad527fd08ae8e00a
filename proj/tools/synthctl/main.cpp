#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using synthctl::Index;
using synthctl::cli::Command;
using synthctl::cli::RunConfig;

namespace {

struct OptionalFlags {
  double lambda = 0.0;
  Index components = 0;
  Index matches = 0;
  double zeta = 0.0;
  double cutoff = 0.0;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* components_opt = nullptr;
  CLI::Option* matches_opt = nullptr;
  CLI::Option* zeta_opt = nullptr;
  CLI::Option* cutoff_opt = nullptr;
};

void add_common(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--iters", c.iters, "BSTS Gibbs iterations")->capture_default_str();
  cmd->add_option("--burn-in", c.burn_in, "BSTS burn-in draws")->capture_default_str();
  cmd->add_flag("--scale", c.scale, "standardize controls before PCR/Lasso");
  cmd->add_flag("--blocked-cv", c.blocked_cv, "contiguous instead of random CV folds");
}

void add_panel_options(CLI::App* cmd, RunConfig& c, OptionalFlags& o) {
  cmd->add_option("--input", c.input, "panel CSV (first column time label)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--treated-col", c.treated_col, "column of the treated unit")->required();
  cmd->add_option("--t0", c.t0, "number of pretreatment periods")->required();
  cmd->add_option("--method", c.method, "ols|pcr|lasso|adh|mdd|spatial|bsts, optionally ',cv'")
      ->capture_default_str();
  cmd->add_flag("--cv", c.cv, "choose lambda / k by cross-validation");
  cmd->add_option("--folds", c.folds, "CV folds (default 5, leave-one-out when T0 < 25)");
  o.lambda_opt = cmd->add_option("--lambda", o.lambda, "Lasso penalty");
  o.components_opt = cmd->add_option("--components", o.components, "PCR components");
  o.matches_opt = cmd->add_option("--matches", o.matches, "MDD matched controls");
  o.zeta_opt = cmd->add_option("--zeta", o.zeta, "spatial decay");
  o.cutoff_opt = cmd->add_option("--cutoff", o.cutoff, "spatial distance cutoff");
  cmd->add_option("--distances", c.distances, "unit,distance CSV for spatial weights")->check(CLI::ExistingFile);
  cmd->add_flag("--invert-prior", c.invert_prior, "BSTS: use the prior template as a precision");
}

void apply(const OptionalFlags& o, RunConfig& c) {
  if (o.lambda_opt && o.lambda_opt->count()) c.lambda = o.lambda;
  if (o.components_opt && o.components_opt->count()) c.components = o.components;
  if (o.matches_opt && o.matches_opt->count()) c.matches = o.matches;
  if (o.zeta_opt && o.zeta_opt->count()) c.zeta = o.zeta;
  if (o.cutoff_opt && o.cutoff_opt->count()) c.cutoff = o.cutoff;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic control estimation: reduced-form weights, BSTS, placebos and simulations"};
  app.require_subcommand(1);
  RunConfig config;
  OptionalFlags est_flags;
  OptionalFlags plc_flags;

  auto* est = app.add_subcommand("estimate", "fit a method and write the counterfactual");
  add_panel_options(est, config, est_flags);
  add_common(est, config);

  auto* plc = app.add_subcommand("placebo", "in-space placebo study");
  add_panel_options(plc, config, plc_flags);
  add_common(plc, config);
  plc->add_option("--statistic", config.statistic, "cumulative or horizon:H")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study on a built-in scenario");
  sim->add_option("--scenario", config.scenario, "A, B, C, D, E, F or FIG1")->required();
  sim->add_option("--reps", config.reps, "replications")->capture_default_str();
  sim->add_option("--methods", config.methods, "methods to compare")->delimiter(',')->capture_default_str();
  add_common(sim, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (est->parsed()) {
    config.command = Command::Estimate;
    apply(est_flags, config);
  }
  if (plc->parsed()) {
    config.command = Command::Placebo;
    apply(plc_flags, config);
  }
  if (sim->parsed()) config.command = Command::Simulate;
  return synthctl::cli::run(config, std::cerr);
}
