#include "synthctl/inference.hpp"

#include <cmath>
#include <optional>

#include "synthctl/parallel.hpp"

namespace synthctl {

EffectSeries effect_series(const Vector& observed_post, const Vector& counterfactual, Method method) {
  if (observed_post.size() != counterfactual.size())
    throw InputError("effect series: observed has " + std::to_string(observed_post.size()) +
                     " periods, counterfactual has " + std::to_string(counterfactual.size()));
  EffectSeries s;
  s.method = method;
  s.effects = observed_post - counterfactual;
  s.cumulative.resize(s.effects.size());
  double run = 0.0;
  for (Index h = 0; h < s.effects.size(); ++h) s.cumulative(h) = (run += s.effects(h));
  return s;
}

std::string EffectStatistic::describe() const {
  return kind == Kind::Cumulative ? "cumulative" : "horizon:" + std::to_string(horizon);
}

double statistic(const EffectSeries& series, const EffectStatistic& stat) {
  if (series.effects.size() == 0) throw InputError("empty effect series");
  if (stat.kind == EffectStatistic::Kind::Cumulative) return series.cumulative(series.cumulative.size() - 1);
  if (stat.horizon < 1 || stat.horizon > series.effects.size())
    throw InputError("horizon " + std::to_string(stat.horizon) + " outside the post period (1.." +
                     std::to_string(series.effects.size()) + ")");
  return series.effects(stat.horizon - 1);
}

PlaceboResult placebo_study(const Panel& panel, const MethodSpec& spec, const EffectStatistic& stat,
                            RngStream& rng) {
  const Index J = panel.units();
  if (J < 2) throw InputError("placebo study needs at least two control units");
  PlaceboResult res;
  res.stat = stat;
  {
    RngStream r0 = rng.substream(0);
    const Estimate est = estimate(panel, spec, r0);
    res.original = statistic(effect_series(panel.treated_post(), est.counterfactual, spec.method), stat);
  }

  struct Slot {
    std::optional<double> value;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(J));
  parallel_for(static_cast<std::size_t>(J), [&](std::size_t j) {
    try {
      const Panel p = panel.placebo(static_cast<Index>(j));
      RngStream r = rng.substream(j + 1);
      const Estimate est = estimate(p, spec, r);
      slots[j].value = statistic(effect_series(p.treated_post(), est.counterfactual, spec.method), stat);
    } catch (const std::exception& e) {
      slots[j].error = e.what();
    }
  });

  for (Index j = 0; j < J; ++j) {
    const Slot& s = slots[static_cast<std::size_t>(j)];
    const std::string& name = panel.unit_names()[static_cast<std::size_t>(j)];
    if (s.value) {
      res.placebos.push_back({j, name, *s.value});
      if (std::abs(*s.value) > std::abs(res.original)) ++res.rank;
    } else {
      res.failures.push_back({j, name, s.error});
    }
  }
  res.eligible = static_cast<Index>(res.placebos.size());
  return res;
}

BiasVariance bias_variance(const std::vector<double>& estimates, double truth) {
  if (estimates.size() < 2) throw InputError("bias-variance needs at least two estimates");
  BiasVariance bv;
  bv.n = static_cast<Index>(estimates.size());
  const double n = static_cast<double>(estimates.size());
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= n;
  double var = 0.0;
  double mse = 0.0;
  for (double e : estimates) {
    var += (e - mean) * (e - mean);
    mse += (e - truth) * (e - truth);
  }
  bv.variance = var / n;
  bv.mse = mse / n;
  bv.bias_sq = (mean - truth) * (mean - truth);
  return bv;
}

}  // namespace synthctl
