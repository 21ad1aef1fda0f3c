#pragma once

#include <string>

#include <json.hpp>

#include "emob/simulator.hpp"

namespace emob {

/// {per_day:[{day,gmv,cost,nv,sc,demand_satisfied_rate,poi_coverage,budget_violated}],
///  episode:{GMV,NV,SC,PM,objective,cost,infeasible_days}, w}. Money in currency units.
nlohmann::json report_json(const EpisodeReport& report);
EpisodeReport report_from_json(const nlohmann::json& j);

inline constexpr const char* kDailyHeader = "day,sc,nv,gmv,cost,budget_violated";
std::string daily_csv(const EpisodeReport& report);

/// Plan file: JSON array of {day, active:[ids]}. A day-0 entry sets the
/// starting deployment; without one the scenario's initial deployment is used.
nlohmann::json plan_json(const DeploymentPlan& plan);
DeploymentPlan plan_from_json(const nlohmann::json& j, const Scenario& scenario);
DeploymentPlan load_plan(const std::string& path, const Scenario& scenario);

std::string read_text_file(const std::string& path);

}  // namespace emob
