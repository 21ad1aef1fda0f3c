#pragma once

#include <memory>
#include <string>
#include <vector>

#include "emob/simulator.hpp"

namespace emob {

/// Per-station trailing means over already simulated days.
struct HistoryStats {
  int window = 7;
  int days = 0;  // days actually averaged
  std::vector<double> net_revenue;  // money units per day
  std::vector<double> satisfied;
  std::vector<double> pickups;  // demand intents, served or not

  /// Averages the last `window` records. Stations that were closed on a day
  /// get an estimated revenue: intents x expected order value x that day's
  /// system-wide satisfied rate, minus what they would have cost.
  static HistoryStats from_history(const Scenario& scenario, const std::vector<DayRecord>& history, int window = 7);
};

/// Number of stations swapped per day: Poisson(mean_fraction * |pool|)
/// truncated at max_fraction * |pool|.
struct ChurnDist {
  double mean_fraction = 0.03;
  double max_fraction = 0.10;

  int sample(Rng& rng, int pool_size) const;
};

enum class GreedyKind { Revenue, Coverage };

/// Opens the n best-scoring inactive stations and closes the n worst-scoring
/// active ones; n is clipped to what is available. Ties go to the lower id.
std::vector<StationId> churn_by_score(const std::vector<StationId>& active, const std::vector<double>& score, int n);

/// Coverage score: 1/2 (POIs the station alone covers, or would newly cover,
/// as a share of all POIs) + 1/2 (its share of mean pick-ups).
std::vector<double> coverage_scores(const CandidatePool& pool, const std::vector<StationId>& active,
                                    const std::vector<double>& pickups);

std::vector<StationId> plan_greedy(GreedyKind kind, const Scenario& scenario, const std::vector<StationId>& active,
                                   const HistoryStats& stats, const ChurnDist& churn, Rng& rng);

DeploymentPlan plan_fixed(const std::vector<StationId>& initial, int days);

struct OneTimeOptions {
  double poi_weight = 0.5;
  double demand_weight = 0.5;
  double capacity_per_dock = 2.0;  // daily pick-ups a dock can absorb
};

/// Greedy budgeted maximisation of poi_weight * coverage + demand_weight *
/// capture by marginal gain per unit cost, where a station captures
/// min(estimate, capacity_per_dock * docks) of the total estimated demand.
/// The best single affordable station is returned instead when it scores higher.
std::vector<StationId> plan_one_time(const CandidatePool& pool, const std::vector<double>& demand_estimate,
                                     Money budget, const OneTimeOptions& options = {},
                                     const WarningSink& warn = {});

double one_time_value(const CandidatePool& pool, const std::vector<double>& demand_estimate,
                      const std::vector<StationId>& chosen, const OneTimeOptions& options = {});

/// Demand estimate for the incremental planner: trailing mean of pick-up
/// intents, or the scenario prior when nothing has been simulated.
std::vector<double> rolling_demand_estimate(const Scenario& scenario, const std::vector<DayRecord>& history,
                                            int window = 7);

/// Mean daily GMV of keeping the initial deployment, from one simulated
/// episode with a fixed seed.
Money estimate_fixed_daily_gmv(const Scenario& scenario, std::uint64_t seed);

// --- planners ----------------------------------------------------------------

class FixedPlanner final : public Planner {
 public:
  explicit FixedPlanner(std::vector<StationId> initial) : initial_(std::move(initial)) {}
  std::vector<StationId> plan_day(PlanningContext&) override { return initial_; }

 private:
  std::vector<StationId> initial_;
};

class GreedyChurnPlanner final : public Planner {
 public:
  GreedyChurnPlanner(GreedyKind kind, ChurnDist churn = {}, int window = 7)
      : kind_(kind), churn_(churn), window_(window) {}
  std::vector<StationId> plan_day(PlanningContext& ctx) override;

 private:
  GreedyKind kind_;
  ChurnDist churn_;
  int window_;
};

class OneTimePlanner final : public Planner {
 public:
  explicit OneTimePlanner(std::vector<StationId> snapshot) : snapshot_(std::move(snapshot)) {}
  std::vector<StationId> plan_day(PlanningContext&) override { return snapshot_; }
  const std::vector<StationId>& snapshot() const { return snapshot_; }

 private:
  std::vector<StationId> snapshot_;
};

class IncrementalPlanner final : public Planner {
 public:
  explicit IncrementalPlanner(OneTimeOptions options = {}, int window = 7, WarningSink warn = {})
      : options_(options), window_(window), warn_(std::move(warn)) {}
  std::vector<StationId> plan_day(PlanningContext& ctx) override;

 private:
  OneTimeOptions options_;
  int window_;
  WarningSink warn_;
};

struct BaselineOptions {
  ChurnDist churn;
  OneTimeOptions one_time;
  Money oo_budget{-1};  // negative: estimated fixed-deployment daily GMV
  int window = 7;
  WarningSink warn;
};

/// "fd", "rev", "cov", "oo" or "io".
std::unique_ptr<Planner> make_baseline(const std::string& name, const Scenario& scenario,
                                       const BaselineOptions& options = {});

}  // namespace emob
