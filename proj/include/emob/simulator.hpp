#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <variant>
#include <vector>

#include "emob/domain.hpp"
#include "emob/metrics.hpp"
#include "emob/rng.hpp"
#include "emob/scenario.hpp"

namespace emob {

enum class VehicleStatus : std::uint8_t { Parked, Charging, InTransit, Queued, Retired };

struct Vehicle {
  int id = 0;
  double range_km = 0;
  VehicleStatus status = VehicleStatus::Parked;
  StationId station = -1;  // dock (parked/charging) or queue location
  int order = -1;          // index into SimState::orders while in transit/queued
};

struct Order {
  DemandEvent demand;
  int vehicle_id = -1;
  int depart_step = 0;
  int arrive_step = 0;
  double trip_km = 0;
  Money price;
};

/// Mutable world for one episode. Single-threaded; many states can run in
/// parallel against the same immutable Scenario.
class SimState {
 public:
  explicit SimState(const Scenario& scenario);

  const Scenario& scenario() const { return *scenario_; }

  int day = 0;
  int step = 0;  // global step
  std::vector<Vehicle> vehicles;
  std::vector<std::vector<int>> docked;  // vehicle ids per station
  std::vector<std::deque<int>> queued;   // vehicles waiting for a dock, per destination
  std::vector<std::uint8_t> active;
  std::vector<Order> orders;
  DayTallies tallies;

  struct Arrival {
    int step;
    int order;
    bool operator>(const Arrival& o) const { return step != o.step ? step > o.step : order > o.order; }
  };
  std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> arrivals;

  int free_docks(StationId s) const {
    return scenario_->pool.stations[s].docks - static_cast<int>(docked[s].size());
  }
  int fleet_size() const { return fleet_size_; }
  int count(VehicleStatus status) const;
  std::vector<StationId> active_ids() const { return from_mask(active); }

  /// Resets tallies for a new day and advances the clock to its first step.
  void begin_day(int new_day);
  int add_vehicle(StationId at);
  void dock(int vehicle_id, StationId at);
  void retire(int vehicle_id);

 private:
  const Scenario* scenario_;
  int fleet_size_ = 0;
};

/// Day-start deployment: opened stations get floor(u * docks) fully charged
/// vehicles, u ~ U[alloc_min, alloc_max]; vehicles at closed stations move to
/// the nearest open station with a free dock, or retire if none exists.
void apply_snapshot(SimState& state, const DeploymentSnapshot& snapshot, Rng& rng);

std::variant<Order, Rejection> try_accept_order(SimState& state, const DemandEvent& demand);

/// Ends the trip of `order_index`: docks at the destination, else repositions
/// within the radius, else queues. The order counts as satisfied either way.
void complete_arrival(SimState& state, int order_index);

/// Gives every queued vehicle another chance to dock.
void retry_queued(SimState& state);

void tick_charging(SimState& state);

struct DayRngs {
  Rng demand;
  Rng alloc;
};

using StepObserver = std::function<void(const SimState&)>;

/// Applies the snapshot and runs the 144 steps of the current day.
DayTallies run_day(SimState& state, const DeploymentSnapshot& snapshot, DayRngs& rngs,
                   const StepObserver& observer = {});

/// Runs remaining trips to completion without new demand, crediting them to
/// the current day's tallies.
void drain_arrivals(SimState& state, const StepObserver& observer = {});

// --- episodes ---------------------------------------------------------------------

struct DayRecord {
  DeploymentSnapshot snapshot;
  DayTallies tallies;
};

struct PlanningContext {
  const Scenario& scenario;
  const SimState& state;
  int day;                                 // the day being planned
  const std::vector<DayRecord>& history;  // warm-up day first
  const std::vector<StationId>& current;  // active set going into `day`
  Rng& rng;
};

/// Closed-loop planner: chooses each day's snapshot from what has been
/// simulated so far.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::vector<StationId> plan_day(PlanningContext& ctx) = 0;
  virtual void after_day(PlanningContext& /*ctx*/, const DayRecord& /*record*/) {}
};

class FixedPlanPlanner final : public Planner {
 public:
  explicit FixedPlanPlanner(const DeploymentPlan& plan) : plan_(plan) {}
  std::vector<StationId> plan_day(PlanningContext& ctx) override { return plan_.snapshots.at(ctx.day - 1).active; }

 private:
  const DeploymentPlan& plan_;
};

struct EpisodeOptions {
  double w = 1.0;
  /// Simulate day 0 under the initial snapshot before day 1 so planners and
  /// rewards have a previous day to look at. Not part of the report.
  bool warmup = true;
  StepObserver observer;
};

struct EpisodeResult {
  DeploymentPlan plan;
  std::vector<DayRecord> history;  // warm-up (if any) then days 1..T
  EpisodeReport report;
};

/// Streams of an episode seed: 1 demand, 2 allocation, 3 planner.
EpisodeResult run_closed_loop(const Scenario& scenario, Planner& planner, const std::vector<StationId>& initial,
                              std::uint64_t seed, const EpisodeOptions& options = {});

/// Validates and runs a fixed plan. Throws ValidationError before simulating
/// anything when the plan is malformed.
EpisodeResult run_episode(const Scenario& scenario, const DeploymentPlan& plan, std::uint64_t seed,
                          const EpisodeOptions& options = {});

}  // namespace emob
