#include "emob/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace emob {

nlohmann::json report_json(const EpisodeReport& r) {
  nlohmann::json days = nlohmann::json::array();
  for (const auto& d : r.per_day)
    days.push_back({{"day", d.day},
                    {"gmv", d.gmv.units()},
                    {"cost", d.cost.units()},
                    {"nv", d.nv.units()},
                    {"sc", d.sc},
                    {"demand_satisfied_rate", d.demand_satisfied_rate},
                    {"poi_coverage", d.poi_coverage},
                    {"pm", d.pm},
                    {"budget_violated", d.budget_violated}});
  const EpisodeMetrics& e = r.episode;
  return {{"w", r.w},
          {"per_day", days},
          {"episode",
           {{"GMV", e.gmv.units()},
            {"NV", e.nv.units()},
            {"SC", e.sc},
            {"PM", e.pm},
            {"objective", e.objective},
            {"cost", e.cost.units()},
            {"infeasible_days", e.infeasible_days}}}};
}

EpisodeReport report_from_json(const nlohmann::json& j) {
  EpisodeReport r;
  r.w = j.value("w", 1.0);
  for (const auto& d : j.at("per_day")) {
    DayMetrics m;
    m.day = d.at("day").get<int>();
    m.gmv = Money::from_units(d.at("gmv").get<double>());
    m.cost = Money::from_units(d.at("cost").get<double>());
    m.nv = Money::from_units(d.at("nv").get<double>());
    m.sc = d.at("sc").get<double>();
    m.demand_satisfied_rate = d.value("demand_satisfied_rate", 0.0);
    m.poi_coverage = d.value("poi_coverage", 0.0);
    m.pm = d.value("pm", profit_margin(m.gmv, m.cost));
    m.budget_violated = d.at("budget_violated").get<bool>();
    r.per_day.push_back(m);
  }
  r.episode = episode_objective(r.per_day, r.w);
  return r;
}

std::string daily_csv(const EpisodeReport& r) {
  std::ostringstream out;
  out << kDailyHeader << '\n';
  char buf[256];
  for (const auto& d : r.per_day) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.3f,%.3f,%.3f,%d\n", d.day, d.sc, d.nv.units(), d.gmv.units(),
                  d.cost.units(), d.budget_violated ? 1 : 0);
    out << buf;
  }
  return out.str();
}

nlohmann::json plan_json(const DeploymentPlan& plan) {
  nlohmann::json a = nlohmann::json::array();
  a.push_back({{"day", 0}, {"active", plan.initial.active}});
  for (const auto& s : plan.snapshots) a.push_back({{"day", s.day}, {"active", s.active}});
  return a;
}

DeploymentPlan plan_from_json(const nlohmann::json& j, const Scenario& sc) {
  if (!j.is_array()) throw ValidationError("plan file must be a JSON array of {day, active}");
  DeploymentPlan plan;
  plan.initial = DeploymentSnapshot::make(0, sc.initial_active);
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("day") || !e.contains("active"))
      throw ValidationError("plan entries need \"day\" and \"active\"");
    const int day = e.at("day").get<int>();
    auto ids = e.at("active").get<std::vector<StationId>>();
    if (day == 0)
      plan.initial = DeploymentSnapshot::make(0, std::move(ids));
    else
      plan.snapshots.push_back(DeploymentSnapshot::make(day, std::move(ids)));
  }
  return plan;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DeploymentPlan load_plan(const std::string& path, const Scenario& sc) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed plan file " + path + ": " + e.what());
  }
  return plan_from_json(j, sc);
}

}  // namespace emob
