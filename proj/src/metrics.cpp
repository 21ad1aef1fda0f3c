#include "emob/metrics.hpp"

#include <algorithm>

namespace emob {

double poi_coverage(const CandidatePool& pool, const std::vector<std::uint8_t>& active_mask) {
  if (pool.pois.empty()) return 0.0;
  int covered = 0;
  for (const auto& stations : pool.stations_of_poi)
    for (StationId s : stations)
      if (active_mask[s]) {
        ++covered;
        break;
      }
  return static_cast<double>(covered) / static_cast<double>(pool.pois.size());
}

double poi_coverage(const CandidatePool& pool, const std::vector<StationId>& active) {
  return poi_coverage(pool, to_mask(active, pool.size()));
}

double demand_satisfied_rate(int satisfied, int total_demand) {
  if (total_demand <= 0) return 1.0;
  return std::clamp(static_cast<double>(satisfied) / total_demand, 0.0, 1.0);
}

double service_coverage(double satisfied_rate, double poi_cov) { return 0.5 * satisfied_rate + 0.5 * poi_cov; }

double service_coverage(const DeploymentSnapshot& snapshot, const DayTallies& tallies, const CandidatePool& pool) {
  return service_coverage(demand_satisfied_rate(tallies.satisfied, tallies.total_demand),
                          poi_coverage(pool, snapshot.active));
}

double profit_margin(Money gmv, Money cost) {
  if (gmv.milli <= 0) return cost.milli > 0 ? -1.0 : 0.0;
  const double pm = static_cast<double>((gmv - cost).milli) / static_cast<double>(gmv.milli);
  return std::clamp(pm, -1.0, 1.0);
}

DayMetrics day_metrics(const DeploymentSnapshot& snapshot, const DayTallies& tallies, const CandidatePool& pool) {
  DayMetrics m;
  m.day = tallies.day;
  m.gmv = tallies.gmv;
  m.cost = tallies.cost;
  m.nv = tallies.gmv - tallies.cost;
  m.demand_satisfied_rate = demand_satisfied_rate(tallies.satisfied, tallies.total_demand);
  m.poi_coverage = poi_coverage(pool, snapshot.active);
  m.sc = service_coverage(m.demand_satisfied_rate, m.poi_coverage);
  m.pm = profit_margin(m.gmv, m.cost);
  m.budget_violated = m.cost > m.gmv;
  return m;
}

EpisodeMetrics episode_objective(const std::vector<DayMetrics>& days, double w) {
  EpisodeMetrics e;
  double sc_sum = 0;
  for (const auto& d : days) {
    e.gmv += d.gmv;
    e.cost += d.cost;
    sc_sum += d.sc;
    if (d.budget_violated) ++e.infeasible_days;
  }
  e.nv = e.gmv - e.cost;
  e.sc = days.empty() ? 0.0 : sc_sum / static_cast<double>(days.size());
  e.pm = profit_margin(e.gmv, e.cost);
  e.objective = e.sc + w * e.pm;
  return e;
}

EpisodeReport make_report(std::vector<DayMetrics> days, double w) {
  EpisodeReport r;
  r.w = w;
  r.episode = episode_objective(days, w);
  r.per_day = std::move(days);
  return r;
}

RegionDayMetrics region_day_metrics(const std::vector<StationId>& members, const std::vector<int>& region_pois,
                                    const std::vector<std::uint8_t>& active, const DayTallies& tallies,
                                    const CandidatePool& pool) {
  RegionDayMetrics m;
  int demand = 0;
  int satisfied = 0;
  for (StationId s : members) {
    const auto& t = tallies.stations[s];
    demand += t.pickups_intent;
    satisfied += t.satisfied;
    m.gmv += t.revenue;
    if (active[s]) m.cost += pool.stations[s].daily_cost;
  }
  m.nv = m.gmv - m.cost;

  double poi_cov = 1.0;
  if (!region_pois.empty()) {
    int covered = 0;
    for (int p : region_pois)
      for (StationId s : pool.stations_of_poi[p])
        if (active[s] && std::find(members.begin(), members.end(), s) != members.end()) {
          ++covered;
          break;
        }
    poi_cov = static_cast<double>(covered) / static_cast<double>(region_pois.size());
  }
  m.sc = service_coverage(demand_satisfied_rate(satisfied, demand), poi_cov);
  m.pm = profit_margin(m.gmv, m.cost);
  return m;
}

double agent_reward(const RegionDayMetrics& prev, const RegionDayMetrics& cur, const RewardConfig& config) {
  const double g_sc = cur.sc - prev.sc;
  const double g_pm = cur.pm - prev.pm;
  return g_sc + config.w * g_pm + config.lambda * std::min(cur.nv.units(), 0.0);
}

}  // namespace emob
