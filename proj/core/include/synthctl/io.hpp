#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthctl/estimator.hpp"
#include "synthctl/inference.hpp"
#include "synthctl/simulation.hpp"

namespace synthctl {

/// Shortest round-trip decimal; "NA" for NaN.
std::string format_number(double x);
/// Fixed number of decimals.
std::string format_fixed(double x, int decimals);

nlohmann::json to_json(const Fit& fit, const std::vector<std::string>& unit_names);
nlohmann::json to_json(const CvResult& cv);
nlohmann::json to_json(const BstsSummary& bsts, const std::vector<std::string>& unit_names);
nlohmann::json to_json(const Estimate& est, const Panel& panel);
nlohmann::json to_json(const ScenarioSpec& spec);
nlohmann::json to_json(const ScenarioReport& report);
nlohmann::json to_json(const PlaceboResult& result);

/// time, observed, counterfactual, effect (+ lower, upper for BSTS).
std::string counterfactual_csv(const Panel& panel, const Estimate& est);
/// time, effect, cumulative.
std::string effects_csv(const Panel& panel, const EffectSeries& effects);
/// unit, weight; sorted by |weight| descending, ties in column order.
std::string weights_csv(const Panel& panel, const Fit& fit);
std::string placebo_csv(const PlaceboResult& result);
/// Table 2 layout, one row per method.
std::string report_csv(const ScenarioReport& report);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace synthctl
