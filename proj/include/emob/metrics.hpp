#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "emob/domain.hpp"

namespace emob {

enum class Rejection : std::uint8_t { OriginInactive = 0, DestInactive = 1, NoVehicle = 2, InsufficientRange = 3 };
inline constexpr int kRejectionKinds = 4;

struct StationTally {
  int pickups_intent = 0;  // demand originating here, whether served or not
  int returns_intent = 0;  // demand heading here
  int accepted = 0;
  int satisfied = 0;  // orders from here completed today
  Money revenue;      // price of those orders
  double parked_vehicle_steps = 0;
  double parked_range_sum = 0;
};

/// Raw counts for one simulated day.
struct DayTallies {
  int day = 0;
  Money gmv;
  Money cost;
  int total_demand = 0;
  int accepted = 0;
  int satisfied = 0;
  std::array<int, kRejectionKinds> rejected{};
  int retired = 0;
  int relocated = 0;
  int repositioned = 0;
  int queued = 0;
  std::vector<StationTally> stations;
};

struct DayMetrics {
  int day = 0;
  Money gmv;
  Money cost;
  Money nv;
  double demand_satisfied_rate = 0;
  double poi_coverage = 0;
  double sc = 0;
  double pm = 0;
  bool budget_violated = false;
};

struct EpisodeMetrics {
  Money gmv;
  Money cost;
  Money nv;
  double sc = 0;
  double pm = 0;
  double objective = 0;
  int infeasible_days = 0;
};

struct EpisodeReport {
  double w = 1.0;
  std::vector<DayMetrics> per_day;
  EpisodeMetrics episode;
};

struct RewardConfig {
  double w = 1.0;
  double lambda = 0.0;
  double gamma = 0.99;
};

double poi_coverage(const CandidatePool& pool, const std::vector<std::uint8_t>& active_mask);
double poi_coverage(const CandidatePool& pool, const std::vector<StationId>& active);
/// 1 when there was no demand at all; clamped to [0, 1] because orders that
/// straddle midnight are credited on the day they complete.
double demand_satisfied_rate(int satisfied, int total_demand);
double service_coverage(double satisfied_rate, double poi_cov);
double service_coverage(const DeploymentSnapshot& snapshot, const DayTallies& tallies, const CandidatePool& pool);
/// NV / GMV clamped to [-1, 1]; 0 with no activity, -1 with cost but no income.
double profit_margin(Money gmv, Money cost);

DayMetrics day_metrics(const DeploymentSnapshot& snapshot, const DayTallies& tallies, const CandidatePool& pool);
EpisodeMetrics episode_objective(const std::vector<DayMetrics>& days, double w);
EpisodeReport make_report(std::vector<DayMetrics> days, double w);

/// Metrics restricted to one region: its own stations, the demand that
/// originates there, and the POIs assigned to it.
struct RegionDayMetrics {
  double sc = 0;
  double pm = 0;
  Money gmv;
  Money cost;
  Money nv;
};

RegionDayMetrics region_day_metrics(const std::vector<StationId>& members, const std::vector<int>& region_pois,
                                    const std::vector<std::uint8_t>& active, const DayTallies& tallies,
                                    const CandidatePool& pool);

/// r = (SC_t - SC_{t-1}) + w (PM_t - PM_{t-1}) + lambda * min(NV_t, 0), NV in money units.
double agent_reward(const RegionDayMetrics& prev, const RegionDayMetrics& cur, const RewardConfig& config);

}  // namespace emob
