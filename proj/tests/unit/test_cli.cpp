#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "oracles.hpp"

using namespace synthctl;
using namespace synthctl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("synthctl_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_panel(const fs::path& dir, const Panel& p) {
  fs::create_directories(dir);
  std::ostringstream out;
  out.precision(17);
  out << "time,treated";
  for (const auto& n : p.unit_names()) out << ',' << n;
  out << '\n';
  for (Index t = 0; t < p.periods(); ++t) {
    out << p.time_labels()[static_cast<std::size_t>(t)] << ',' << p.treated()(t);
    for (Index j = 0; j < p.units(); ++j) out << ',' << p.controls()(t, j);
    out << '\n';
  }
  const fs::path file = dir / "panel.csv";
  std::ofstream(file) << out.str();
  return file;
}

RunConfig estimate_config(const fs::path& input, const fs::path& out, const std::string& method) {
  RunConfig c;
  c.command = Command::Estimate;
  c.input = input;
  c.treated_col = "treated";
  c.t0 = 30;
  c.method = method;
  c.out = out;
  c.iters = 300;
  c.burn_in = 100;
  return c;
}

int shell(const std::string& args) {
  const std::string cmd = std::string(SYNTHCTL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("estimate writes every output with the documented columns") {
  const fs::path dir = scratch("estimate");
  const fs::path input = write_panel(dir, oracle::random_panel(40, 5, 30, 1, 8.0));
  std::ostringstream err;
  REQUIRE(run(estimate_config(input, dir / "out", "adh"), err) == 0);
  for (const char* f : {"counterfactual.csv", "effects.csv", "weights.csv", "fit.json", "config.json"})
    CHECK(fs::exists(dir / "out" / f));
  const auto fit = nlohmann::json::parse(slurp(dir / "out" / "fit.json"));
  CHECK(fit.contains("weights"));
  const auto cfg = nlohmann::json::parse(slurp(dir / "out" / "config.json"));
  CHECK(cfg["seed"] == kDefaultSeed);
  CHECK(cfg["t0"] == 30);
  std::istringstream weights(slurp(dir / "out" / "weights.csv"));
  std::string header;
  std::getline(weights, header);
  int rows = 0;
  for (std::string line; std::getline(weights, line);) ++rows;
  CHECK(rows == 5);
  std::istringstream effects(slurp(dir / "out" / "effects.csv"));
  rows = -1;
  for (std::string line; std::getline(effects, line);) ++rows;
  CHECK(rows == 10);
}

TEST_CASE("estimate is byte-identical across runs for every method") {
  const fs::path dir = scratch("determinism");
  const fs::path input = write_panel(dir, oracle::random_panel(40, 5, 30, 2, 5.0));
  for (const std::string m : {"ols", "pcr", "lasso,cv", "adh", "mdd", "bsts"}) {
    std::ostringstream err;
    REQUIRE(run(estimate_config(input, dir / "a", m), err) == 0);
    REQUIRE(run(estimate_config(input, dir / "b", m), err) == 0);
    for (const char* f : {"counterfactual.csv", "effects.csv", "weights.csv", "fit.json", "config.json"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("input errors exit 1 and leave no output") {
  const fs::path dir = scratch("input_errors");
  const fs::path input = write_panel(dir, oracle::random_panel(40, 5, 30, 3));
  std::ostringstream err;
  RunConfig bad_col = estimate_config(input, dir / "o1", "adh");
  bad_col.treated_col = "missing";
  CHECK(run(bad_col, err) == 1);
  CHECK(!fs::exists(dir / "o1"));
  CHECK(err.str().find("missing") != std::string::npos);

  RunConfig bad_method = estimate_config(input, dir / "o2", "ridge");
  CHECK(run(bad_method, err) == 1);
  RunConfig stray = estimate_config(input, dir / "o3", "adh");
  stray.lambda = 0.5;
  CHECK(run(stray, err) == 1);
  RunConfig spatial = estimate_config(input, dir / "o4", "spatial");
  CHECK(run(spatial, err) == 1);
  RunConfig burn = estimate_config(input, dir / "o5", "bsts");
  burn.burn_in = burn.iters;
  CHECK(run(burn, err) == 1);
  RunConfig t0 = estimate_config(input, dir / "o6", "adh");
  t0.t0 = 40;
  CHECK(run(t0, err) == 1);
  for (const char* o : {"o2", "o3", "o4", "o5", "o6"}) CHECK(!fs::exists(dir / o));

  RunConfig sim;
  sim.command = Command::Simulate;
  sim.scenario = "Z";
  sim.out = dir / "o7";
  CHECK(run(sim, err) == 1);
  CHECK(!fs::exists(dir / "o7"));
}

TEST_CASE("numerical failure exits 2") {
  const fs::path dir = scratch("numerical");
  Panel base = oracle::random_panel(40, 3, 30, 4);
  Matrix C = base.controls();
  C.col(2) = 2.0 * C.col(0) - C.col(1);
  const fs::path input = write_panel(dir, Panel(base.time_labels(), base.treated(), C, 30, base.unit_names()));
  std::ostringstream err;
  CHECK(run(estimate_config(input, dir / "out", "ols"), err) == 2);
  CHECK(!fs::exists(dir / "out"));
}

TEST_CASE("a failed write removes the files already written") {
  const fs::path dir = scratch("partial");
  const fs::path input = write_panel(dir, oracle::random_panel(40, 5, 30, 5));
  fs::create_directories(dir / "out" / "fit.json");
  std::ostringstream err;
  CHECK(run(estimate_config(input, dir / "out", "adh"), err) == 1);
  CHECK(fs::is_directory(dir / "out" / "fit.json"));
  CHECK(!fs::exists(dir / "out" / "counterfactual.csv"));
  CHECK(!fs::exists(dir / "out" / "weights.csv"));
}

TEST_CASE("placebo command") {
  const fs::path dir = scratch("placebo");
  const fs::path input = write_panel(dir, oracle::random_panel(40, 5, 30, 6, 30.0));
  RunConfig c = estimate_config(input, dir / "out", "adh");
  c.command = Command::Placebo;
  std::ostringstream err;
  REQUIRE(run(c, err) == 0);
  const auto s = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(s["rank"] == 0);
  CHECK(s["method"] == "ADH");
  CHECK(fs::exists(dir / "out" / "placebo.csv"));
  c.statistic = "horizon:0";
  c.out = dir / "bad";
  CHECK(run(c, err) == 1);
  CHECK(!fs::exists(dir / "bad"));
  CHECK(parse_statistic("horizon:3").horizon == 3);
  CHECK_THROWS_AS(parse_statistic("median"), InputError);
}

TEST_CASE("simulate command writes the report") {
  const fs::path dir = scratch("simulate");
  RunConfig c;
  c.command = Command::Simulate;
  c.scenario = "A";
  c.reps = 2;
  c.methods = {"adh", "lasso"};
  c.out = dir / "out";
  std::ostringstream err;
  REQUIRE(run(c, err) == 0);
  std::istringstream report(slurp(dir / "out" / "report.csv"));
  std::string header;
  std::getline(report, header);
  CHECK(header.find("mean") != std::string::npos);
  int rows = 0;
  for (std::string line; std::getline(report, line);) ++rows;
  CHECK(rows == 2);
  CHECK(nlohmann::json::parse(slurp(dir / "out" / "config.json"))["reps"] == 2);
}

TEST_CASE("binary: exit codes and reproducible output") {
  const fs::path dir = scratch("binary");
  const fs::path input = write_panel(dir, oracle::random_panel(40, 5, 30, 7, 4.0));
  const std::string common = "--input " + input.string() + " --treated-col treated --t0 30 --method lasso,cv";
  CHECK(shell("estimate " + common + " --out " + (dir / "a").string()) == 0);
  CHECK(shell("estimate " + common + " --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "effects.csv") == slurp(dir / "b" / "effects.csv"));
  CHECK(slurp(dir / "a" / "fit.json") == slurp(dir / "b" / "fit.json"));
  CHECK(shell("estimate " + common + " --seed 5 --out " + (dir / "c").string()) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "c" / "config.json"))["seed"] == 5);

  CHECK(shell("estimate --input /nonexistent.csv --treated-col treated --t0 30 --out " + (dir / "d").string()) == 1);
  CHECK(shell("estimate " + common + " --lambda -1 --out " + (dir / "e").string()) == 1);
  CHECK(shell("simulate --scenario nope --out " + (dir / "f").string()) == 1);
  CHECK(shell("frobnicate") == 1);
  for (const char* o : {"d", "e", "f"}) CHECK(!fs::exists(dir / o));
}
