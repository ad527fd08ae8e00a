#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "synthctl/inference.hpp"

using namespace synthctl;

namespace {

Panel exchangeable_panel(Index J, Index T, Index t0, std::uint64_t seed, double effect = 0.0) {
  RngStream rng(seed, 31);
  Vector factor(T);
  for (Index t = 0; t < T; ++t) factor(t) = 0.5 * std::sin(0.3 * static_cast<double>(t)) + 0.3 * rng.normal();
  Matrix all(T, J + 1);
  for (Index j = 0; j <= J; ++j)
    for (Index t = 0; t < T; ++t) all(t, j) = 10.0 + factor(t) + rng.normal();
  Vector y = all.col(0);
  y.tail(T - t0).array() += effect;
  std::vector<std::string> labels, names;
  for (Index t = 0; t < T; ++t) labels.push_back(std::to_string(t + 1));
  for (Index j = 0; j < J; ++j) names.push_back("d" + std::to_string(j + 1));
  return Panel(labels, y, all.rightCols(J), t0, names);
}

}  // namespace

TEST_CASE("effect series and statistics") {
  Vector obs(4), cf(4);
  obs << 5, 6, 7, 8;
  cf << 4, 4, 4, 10;
  const EffectSeries s = effect_series(obs, cf, Method::LASSO);
  CHECK(s.method == Method::LASSO);
  CHECK(s.effects == (Vector(4) << 1, 2, 3, -2).finished());
  CHECK(s.cumulative == (Vector(4) << 1, 3, 6, 4).finished());
  CHECK(statistic(s, {}) == 4.0);
  CHECK(statistic(s, {EffectStatistic::Kind::Horizon, 2}) == 2.0);
  CHECK_THROWS_AS(statistic(s, {EffectStatistic::Kind::Horizon, 5}), InputError);
  CHECK_THROWS_AS(statistic(s, {EffectStatistic::Kind::Horizon, 0}), InputError);
  CHECK(EffectStatistic{EffectStatistic::Kind::Horizon, 3}.describe() == "horizon:3");
  CHECK(EffectStatistic{}.describe() == "cumulative");

  const EffectSeries r = effect_series(cf, obs);
  CHECK(r.effects == -s.effects);
  CHECK(r.cumulative == -s.cumulative);
  CHECK_THROWS_AS(effect_series(obs, cf.head(3)), InputError);

  const EffectSeries zero = effect_series(obs, obs);
  CHECK(zero.cumulative.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("large effect ranks first among placebos") {
  const Panel p = exchangeable_panel(8, 40, 30, 1, 25.0);
  RngStream rng(1, 0);
  const PlaceboResult res = placebo_study(p, MethodSpec::of(Method::ADH), {}, rng);
  CHECK(res.eligible == 8);
  CHECK(res.placebos.size() == 8);
  CHECK(res.failures.empty());
  CHECK(res.rank == 0);
  CHECK(res.ratio() == 0.0);
  CHECK(res.robust());
  CHECK(res.original == doctest::Approx(250.0).epsilon(0.1));
  for (std::size_t i = 0; i < res.placebos.size(); ++i) CHECK(res.placebos[i].unit == static_cast<Index>(i));
}

TEST_CASE("placebo study on two controls runs twice and is reproducible") {
  const Panel p = exchangeable_panel(2, 30, 25, 2);
  RngStream a(2, 0), b(2, 0);
  const PlaceboResult x = placebo_study(p, MethodSpec::of(Method::LASSO), {}, a);
  const PlaceboResult y = placebo_study(p, MethodSpec::of(Method::LASSO), {}, b);
  CHECK(x.eligible + static_cast<Index>(x.failures.size()) == 2);
  CHECK(x.original == y.original);
  REQUIRE(x.placebos.size() == y.placebos.size());
  for (std::size_t i = 0; i < x.placebos.size(); ++i) CHECK(x.placebos[i].statistic == y.placebos[i].statistic);
  CHECK_THROWS_AS(placebo_study(exchangeable_panel(1, 30, 25, 3), MethodSpec::of(Method::ADH), {}, a), InputError);
}

TEST_CASE("rank counts strictly larger absolute statistics") {
  const Panel p = exchangeable_panel(6, 40, 30, 4);
  RngStream rng(4, 0);
  const PlaceboResult res = placebo_study(p, MethodSpec::of(Method::ADH), {EffectStatistic::Kind::Horizon, 1}, rng);
  Index rank = 0;
  for (const auto& e : res.placebos)
    if (std::abs(e.statistic) > std::abs(res.original)) ++rank;
  CHECK(res.rank == rank);
  CHECK(res.ratio() == doctest::Approx(static_cast<double>(rank) / 6.0));
}

TEST_CASE("failed placebo fits are recorded and skipped") {
  Panel base = exchangeable_panel(5, 40, 30, 5, 10.0);
  Matrix C = base.controls();
  C.col(3).setConstant(7.0);
  const Panel p(base.time_labels(), base.treated(), C, 30, base.unit_names());
  RngStream rng(5, 0);
  const PlaceboResult res = placebo_study(p, MethodSpec::of(Method::LASSO), {}, rng);
  REQUIRE(res.failures.size() == 1);
  CHECK(res.failures[0].unit == 3);
  CHECK(res.failures[0].name == "d4");
  CHECK(!res.failures[0].message.empty());
  CHECK(res.eligible == 4);
}

TEST_CASE("without an effect placebo ranks are spread out") {
  double total = 0.0;
  int near_zero = 0;
  const int panels = 40;
  for (int i = 0; i < panels; ++i) {
    const Panel p = exchangeable_panel(9, 30, 24, 100 + static_cast<std::uint64_t>(i));
    RngStream rng(static_cast<std::uint64_t>(i), 0);
    const PlaceboResult res = placebo_study(p, MethodSpec::of(Method::ADH), {}, rng);
    total += res.ratio();
    if (res.rank == 0) ++near_zero;
  }
  // Exchangeable units: the rank is uniform on 0..9, ratio mean 0.5.
  CHECK(std::abs(total / panels - 0.5) < 0.15);
  CHECK(near_zero < 12);
}

TEST_CASE("bias-variance decomposition") {
  const BiasVariance bv = bias_variance({1.0, 2.0, 3.0, 6.0}, 2.0);
  CHECK(bv.n == 4);
  CHECK(bv.mse == doctest::Approx((1.0 + 0.0 + 1.0 + 16.0) / 4.0));
  CHECK(bv.bias_sq == doctest::Approx(1.0));
  CHECK(bv.variance == doctest::Approx((4.0 + 1.0 + 0.0 + 9.0) / 4.0));
  CHECK(bv.mse == doctest::Approx(bv.bias_sq + bv.variance));

  const BiasVariance exact = bias_variance({5.0, 5.0, 5.0}, 5.0);
  CHECK(exact.mse == 0.0);
  CHECK(exact.variance == 0.0);
  CHECK_THROWS_AS(bias_variance({1.0}, 0.0), InputError);

  RngStream rng(9, 0);
  std::vector<double> e(500);
  for (auto& v : e) v = 3.0 + rng.normal();
  const BiasVariance r = bias_variance(e, 2.5);
  CHECK(r.mse == doctest::Approx(r.bias_sq + r.variance).epsilon(1e-12));
}
