#include <benchmark/benchmark.h>

#include "synthctl/bsts.hpp"
#include "synthctl/kalman.hpp"
#include "synthctl/linalg.hpp"
#include "synthctl/model_selection.hpp"
#include "synthctl/simulation.hpp"

using namespace synthctl;

namespace {

const GeneratedPanel& scenario_c() {
  static const GeneratedPanel g = [] {
    RngStream rng(1, 1);
    return generate(make_scenario(Scenario::C, 1), rng);
  }();
  return g;
}

void BM_LassoPath(benchmark::State& state) {
  const Panel& p = scenario_c().panel;
  const auto grid = lambda_grid(p, 50);
  for (auto _ : state) {
    Vector warm;
    for (double lambda : grid) {
      const LassoSolution s = lasso_solve(p.controls_pre(), p.treated_pre(), lambda, {}, warm);
      warm = s.weights;
    }
    benchmark::DoNotOptimize(warm.data());
  }
}
BENCHMARK(BM_LassoPath)->Unit(benchmark::kMillisecond);

void BM_LassoCrossValidation(benchmark::State& state) {
  const Panel& p = scenario_c().panel;
  const auto grid = lambda_grid(p, 50);
  for (auto _ : state) {
    RngStream rng(2, 0);
    benchmark::DoNotOptimize(cross_validate(p, Method::LASSO, grid, 5, rng).chosen);
  }
}
BENCHMARK(BM_LassoCrossValidation)->Unit(benchmark::kMillisecond);

void BM_SimplexLeastSquares(benchmark::State& state) {
  const Panel& p = scenario_c().panel;
  const Matrix Y = p.controls_pre();
  const Vector y = p.treated_pre();
  for (auto _ : state) benchmark::DoNotOptimize(simplex_constrained_ls(Y, y).objective);
}
BENCHMARK(BM_SimplexLeastSquares)->Unit(benchmark::kMillisecond);

void BM_KalmanFilterSmoother(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  RngStream rng(3, 0);
  Vector y(n);
  for (Index t = 0; t < n; ++t) y(t) = 0.1 * static_cast<double>(t) + rng.normal();
  const StateSpaceModel m = StateSpaceModel::local_linear_trend(Vector::Zero(n), 1.0, 0.1, 0.01, y(0));
  for (auto _ : state) {
    const FilterResult f = kalman_filter(m, y);
    benchmark::DoNotOptimize(kalman_smoother(m, f).mean.back().data());
  }
}
BENCHMARK(BM_KalmanFilterSmoother)->Arg(100)->Arg(1000);

void BM_SimulationSmoother(benchmark::State& state) {
  RngStream rng(4, 0);
  Vector y(100);
  for (Index t = 0; t < 100; ++t) y(t) = rng.normal();
  const StateSpaceModel m = StateSpaceModel::local_linear_trend(Vector::Zero(100), 1.0, 0.1, 0.01, y(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulation_smoother(m, y, rng).data());
}
BENCHMARK(BM_SimulationSmoother);

void BM_GibbsIteration(benchmark::State& state) {
  const Panel& p = scenario_c().panel;
  const BstsPriors pr = default_priors(p.controls_pre(), p.treated_pre());
  BstsOptions opt;
  opt.iterations = 100;
  opt.burn_in = 0;
  for (auto _ : state) {
    RngStream rng(5, 0);
    benchmark::DoNotOptimize(run_gibbs(p, pr, opt, rng).draws.size());
  }
  state.SetItemsProcessed(state.iterations() * opt.iterations);
}
BENCHMARK(BM_GibbsIteration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
