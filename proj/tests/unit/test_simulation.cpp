#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "synthctl/simulation.hpp"

using namespace synthctl;

namespace {

double kurtosis(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  return m4 / (m2 * m2);
}

std::vector<double> differences(const Panel& p) {
  std::vector<double> d;
  const Matrix& C = p.controls();
  for (Index j = 0; j < C.cols(); ++j)
    for (Index t = 1; t < C.rows(); ++t) d.push_back(C(t, j) - C(t - 1, j));
  return d;
}

}  // namespace

TEST_CASE("scenario tags") {
  CHECK(parse_scenario("a") == Scenario::A);
  CHECK(parse_scenario("Fig1") == Scenario::FIG1);
  for (Scenario s : {Scenario::A, Scenario::B, Scenario::C, Scenario::D, Scenario::E, Scenario::F, Scenario::FIG1})
    CHECK(parse_scenario(to_string(s)) == s);
  CHECK_THROWS_AS(parse_scenario("G"), InputError);
}

TEST_CASE("scenario shapes and offsets") {
  const ScenarioSpec c = make_scenario(Scenario::C, 5);
  CHECK(c.units == 150);
  CHECK(c.t0 == 100);
  CHECK(c.periods == 110);
  CHECK(c.offsets(0) == 13.2);
  CHECK(c.offsets(1) == 43.9);
  CHECK(c.offsets.minCoeff() >= 1.0);
  CHECK(c.offsets.maxCoeff() <= 100.0);
  CHECK(make_scenario(Scenario::C, 5).offsets == c.offsets);
  CHECK(make_scenario(Scenario::C, 6).offsets != c.offsets);

  const ScenarioSpec f = make_scenario(Scenario::F, 5);
  CHECK(f.t0 == 10);
  CHECK(f.periods == 20);
  const ScenarioSpec g = make_scenario(Scenario::FIG1, 5);
  CHECK(g.units == 180);
  CHECK(g.t0 == 200);
  CHECK(g.weights.size() == 3);

  RngStream rng(5, 1);
  const GeneratedPanel gp = generate(c, rng);
  CHECK(gp.panel.units() == 150);
  CHECK(gp.panel.periods() == 110);
  CHECK(gp.truth.size() == 10);
}

TEST_CASE("noiseless scenario A is an exact mixture") {
  ScenarioSpec s = make_scenario(Scenario::A, 7);
  s.noise_sd = 0.0;
  s.season_noise = 0.0;
  RngStream rng(7, 1);
  const GeneratedPanel g = generate(s, rng);
  const Vector mix = 0.7 * g.panel.controls().col(0) + 0.3 * g.panel.controls().col(1);
  CHECK((g.panel.treated().head(100) - mix.head(100)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((g.truth - mix.tail(10)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((g.panel.treated_post() - g.truth).array().abs().maxCoeff() == doctest::Approx(20.0));

  RngStream mrng(7, 2);
  const Estimate e = estimate(g.panel, MethodSpec::of(Method::ADH), mrng);
  // Parallel noiseless controls: the weights are not identified, the fit is.
  CHECK((e.fit.fitted_pre - g.panel.treated_pre()).cwiseAbs().maxCoeff() < 1e-3);
  const Vector effect = g.panel.treated_post() - e.counterfactual;
  CHECK((effect.array() - 20.0).abs().maxCoeff() < 1e-3);
}

TEST_CASE("observed minus truth is the effect; truth does not depend on it") {
  ScenarioSpec s = make_scenario(Scenario::C, 8);
  RngStream r1(8, 1), r2(8, 1);
  const GeneratedPanel a = generate(s, r1);
  s.effect = -3.5;
  const GeneratedPanel b = generate(s, r2);
  CHECK(((a.panel.treated_post() - a.truth).array() - 20.0).abs().maxCoeff() < 1e-12);
  CHECK(((b.panel.treated_post() - b.truth).array() + 3.5).abs().maxCoeff() < 1e-12);
  CHECK(a.truth == b.truth);
  CHECK(a.panel.treated_pre() == b.panel.treated_pre());
}

TEST_CASE("scenario D treated series lies outside the control envelope") {
  const ScenarioSpec s = make_scenario(Scenario::D, 9);
  RngStream rng(9, 1);
  const GeneratedPanel g = generate(s, rng);
  const Matrix C = g.panel.controls_pre();
  const Vector y = g.panel.treated_pre();
  int outside = 0;
  for (Index t = 0; t < y.size(); ++t)
    if (y(t) < C.row(t).minCoeff() || y(t) > C.row(t).maxCoeff()) ++outside;
  CHECK(outside >= 90);
}

TEST_CASE("scenario F noise is heavy tailed") {
  const ScenarioSpec f = make_scenario(Scenario::F, 10);
  const ScenarioSpec c = make_scenario(Scenario::C, 10);
  RngStream rf(10, 1), rc(10, 1);
  CHECK(kurtosis(differences(generate(f, rf).panel)) > 20.0);
  CHECK(kurtosis(differences(generate(c, rc).panel)) < 5.0);
}

TEST_CASE("FIG1 treated series mixes observed controls") {
  ScenarioSpec s = make_scenario(Scenario::FIG1, 11);
  s.noise_sd = 0.0;
  RngStream rng(11, 1);
  const GeneratedPanel g = generate(s, rng);
  const Matrix& C = g.panel.controls();
  const Vector mix = 0.3 * C.col(0) + 0.7 * C.col(1) - 0.01 * C.col(2);
  CHECK((g.panel.treated_pre() - mix.head(200)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("monte carlo with two replications is well formed and reproducible") {
  ScenarioSpec s = make_scenario(Scenario::A, 12);
  s.units = 20;
  resolve_offsets(s);
  const std::vector<MethodRun> methods{method_run("adh"), method_run("lasso"), method_run("pcr-cv")};
  const ScenarioReport a = monte_carlo(s, methods, 2);
  const ScenarioReport b = monte_carlo(s, methods, 2);
  CHECK(a.reps == 2);
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[2].label == "pcr-cv");
  CHECK(a.rows[2].method == Method::PCR);
  for (std::size_t m = 0; m < 3; ++m) {
    const MethodSummary& r = a.rows[m];
    CHECK(r.first_effect.size() == 2);
    CHECK(r.out_rmse.size() == 2);
    CHECK(r.failures == 0);
    CHECK(r.valid);
    CHECK(std::isfinite(r.mean));
    CHECK(r.std >= 0.0);
    CHECK(r.bv.mse == doctest::Approx(r.bv.bias_sq + r.bv.variance));
    CHECK(r.first_effect == b.rows[m].first_effect);
    CHECK(r.out_rmse == b.rows[m].out_rmse);
  }
  CHECK_THROWS_AS(monte_carlo(s, methods, 1), InputError);
  CHECK_THROWS_AS(monte_carlo(s, {}, 2), InputError);
  CHECK_THROWS_AS(method_run("nope"), InputError);
}

TEST_CASE("lasso puts its two largest weights on the relevant units") {
  for (Scenario sc : {Scenario::B, Scenario::C}) {
    const ScenarioSpec s = make_scenario(sc, 13);
    RngStream rng(13, 1);
    const GeneratedPanel g = generate(s, rng);
    RngStream mrng(13, 2);
    const Estimate e = estimate(g.panel, MethodSpec::of(Method::LASSO), mrng);
    std::vector<Index> order(static_cast<std::size_t>(e.fit.weights.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    std::partial_sort(order.begin(), order.begin() + 2, order.end(),
                      [&](Index a, Index b) { return std::abs(e.fit.weights(a)) > std::abs(e.fit.weights(b)); });
    CHECK(std::min(order[0], order[1]) == 0);
    CHECK(std::max(order[0], order[1]) == 1);
  }
}
