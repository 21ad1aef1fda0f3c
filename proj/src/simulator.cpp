#include "emob/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace emob {

SimState::SimState(const Scenario& scenario) : scenario_(&scenario) {
  const std::size_t n = scenario.pool.size();
  docked.assign(n, {});
  queued.assign(n, {});
  active.assign(n, 0);
  tallies.stations.assign(n, {});
}

int SimState::count(VehicleStatus status) const {
  return static_cast<int>(
      std::count_if(vehicles.begin(), vehicles.end(), [&](const Vehicle& v) { return v.status == status; }));
}

void SimState::begin_day(int new_day) {
  day = new_day;
  step = new_day * kStepsPerDay;
  tallies = DayTallies{};
  tallies.day = new_day;
  tallies.stations.assign(scenario_->pool.size(), {});
}

int SimState::add_vehicle(StationId at) {
  Vehicle v;
  v.id = static_cast<int>(vehicles.size());
  v.range_km = scenario_->constants.full_range_km;
  v.status = VehicleStatus::Parked;
  v.station = at;
  vehicles.push_back(v);
  docked[at].push_back(v.id);
  ++fleet_size_;
  return v.id;
}

void SimState::dock(int vehicle_id, StationId at) {
  Vehicle& v = vehicles[vehicle_id];
  v.station = at;
  v.order = -1;
  v.status = v.range_km < scenario_->constants.full_range_km ? VehicleStatus::Charging : VehicleStatus::Parked;
  docked[at].push_back(vehicle_id);
}

void SimState::retire(int vehicle_id) {
  Vehicle& v = vehicles[vehicle_id];
  v.status = VehicleStatus::Retired;
  v.station = -1;
  v.order = -1;
  --fleet_size_;
}

namespace {

void undock(SimState& st, int vehicle_id) {
  auto& list = st.docked[st.vehicles[vehicle_id].station];
  list.erase(std::find(list.begin(), list.end(), vehicle_id));
}

/// Nearest active station with a free dock within `radius_km` of `from`,
/// optionally requiring `range_km` to cover the detoured leg. -1 if none.
StationId nearest_with_space(const SimState& st, StationId from, double radius_km, double range_km) {
  const Scenario& sc = st.scenario();
  for (StationId s : sc.pool.by_distance[from]) {
    const double d = sc.pool.dist(from, s);
    if (d > radius_km) break;
    if (!st.active[s] || st.free_docks(s) <= 0) continue;
    if (range_km >= 0 && range_km < sc.constants.detour_factor * d) continue;
    return s;
  }
  return -1;
}

constexpr double kNoRadius = 1e300;
constexpr double kNoRangeCheck = -1.0;

/// Day-start relocation of queued vehicles: destination if it has space,
/// otherwise nearest space anywhere. Vehicles stay queued when the city is full.
void relocate_queued(SimState& st) {
  for (std::size_t s = 0; s < st.queued.size(); ++s) {
    auto& q = st.queued[s];
    std::deque<int> keep;
    for (int vid : q) {
      const auto dest = static_cast<StationId>(s);
      StationId target = (st.active[dest] && st.free_docks(dest) > 0)
                             ? dest
                             : nearest_with_space(st, dest, kNoRadius, kNoRangeCheck);
      if (target < 0) {
        keep.push_back(vid);
        continue;
      }
      st.dock(vid, target);
      ++st.tallies.relocated;
    }
    q.swap(keep);
  }
}

void credit(SimState& st, const Order& o) {
  st.tallies.gmv += o.price;
  ++st.tallies.satisfied;
  auto& t = st.tallies.stations[o.demand.origin];
  ++t.satisfied;
  t.revenue += o.price;
}

}  // namespace

void apply_snapshot(SimState& st, const DeploymentSnapshot& snapshot, Rng& rng) {
  const Scenario& sc = st.scenario();
  const auto next = to_mask(snapshot.active, sc.pool.size());
  for (StationId id : snapshot.active)
    if (!sc.pool.contains(id)) throw ValidationError("snapshot references unknown station " + std::to_string(id));

  std::vector<StationId> closed;
  for (std::size_t s = 0; s < next.size(); ++s) {
    if (next[s] && !st.active[s]) {
      st.active[s] = 1;
      const int docks = sc.pool.stations[s].docks;
      const double u = uniform(rng, sc.constants.alloc_min, sc.constants.alloc_max);
      const int n_new = std::min(static_cast<int>(std::floor(u * docks)), st.free_docks(static_cast<StationId>(s)));
      for (int i = 0; i < n_new; ++i) st.add_vehicle(static_cast<StationId>(s));
    } else if (!next[s] && st.active[s]) {
      closed.push_back(static_cast<StationId>(s));
    }
  }
  for (StationId s : closed) st.active[s] = 0;
  for (StationId s : closed) {
    const std::vector<int> leaving = st.docked[s];
    st.docked[s].clear();
    for (int vid : leaving) {
      const StationId target = nearest_with_space(st, s, kNoRadius, kNoRangeCheck);
      if (target < 0) {
        st.retire(vid);
        ++st.tallies.retired;
      } else {
        st.dock(vid, target);
        ++st.tallies.relocated;
      }
    }
  }
  relocate_queued(st);
}

std::variant<Order, Rejection> try_accept_order(SimState& st, const DemandEvent& demand) {
  const Scenario& sc = st.scenario();
  auto reject = [&](Rejection r) {
    ++st.tallies.rejected[static_cast<int>(r)];
    return r;
  };
  if (!st.active[demand.origin]) return reject(Rejection::OriginInactive);
  if (!st.active[demand.dest]) return reject(Rejection::DestInactive);
  const auto& here = st.docked[demand.origin];
  if (here.empty()) return reject(Rejection::NoVehicle);

  const double trip_km = sc.trip_km(demand.origin, demand.dest);
  int best = -1;
  for (int vid : here) {
    const Vehicle& v = st.vehicles[vid];
    if (best < 0 || v.range_km > st.vehicles[best].range_km ||
        (v.range_km == st.vehicles[best].range_km && vid < best))
      best = vid;
  }
  if (st.vehicles[best].range_km < trip_km) return reject(Rejection::InsufficientRange);

  Order o;
  o.demand = demand;
  o.vehicle_id = best;
  o.depart_step = st.step;
  o.arrive_step = st.step + sc.trip_steps(demand.origin, demand.dest);
  o.trip_km = trip_km;
  o.price = sc.trip_price(demand.origin, demand.dest);

  undock(st, best);
  Vehicle& v = st.vehicles[best];
  v.status = VehicleStatus::InTransit;
  v.order = static_cast<int>(st.orders.size());
  st.orders.push_back(o);
  st.arrivals.push({o.arrive_step, v.order});
  ++st.tallies.accepted;
  ++st.tallies.stations[demand.origin].accepted;
  return o;
}

void complete_arrival(SimState& st, int order_index) {
  const Scenario& sc = st.scenario();
  const Order& o = st.orders[order_index];
  Vehicle& v = st.vehicles[o.vehicle_id];
  v.range_km = std::max(0.0, v.range_km - o.trip_km);
  credit(st, o);

  const StationId dest = o.demand.dest;
  if (st.active[dest] && st.free_docks(dest) > 0) {
    st.dock(v.id, dest);
    return;
  }
  const StationId target = nearest_with_space(st, dest, sc.constants.reposition_radius_km, v.range_km);
  if (target >= 0) {
    v.range_km = std::max(0.0, v.range_km - sc.constants.detour_factor * sc.pool.dist(dest, target));
    st.dock(v.id, target);
    ++st.tallies.repositioned;
    return;
  }
  v.status = VehicleStatus::Queued;
  v.station = dest;
  v.order = -1;
  st.queued[dest].push_back(v.id);
  ++st.tallies.queued;
}

void retry_queued(SimState& st) {
  const Scenario& sc = st.scenario();
  for (std::size_t s = 0; s < st.queued.size(); ++s) {
    auto& q = st.queued[s];
    if (q.empty()) continue;
    const auto dest = static_cast<StationId>(s);
    std::deque<int> keep;
    for (int vid : q) {
      Vehicle& v = st.vehicles[vid];
      if (st.active[dest] && st.free_docks(dest) > 0) {
        st.dock(vid, dest);
        continue;
      }
      const StationId target = nearest_with_space(st, dest, sc.constants.reposition_radius_km, v.range_km);
      if (target >= 0) {
        v.range_km = std::max(0.0, v.range_km - sc.constants.detour_factor * sc.pool.dist(dest, target));
        st.dock(vid, target);
        ++st.tallies.repositioned;
      } else {
        keep.push_back(vid);
      }
    }
    q.swap(keep);
  }
}

void tick_charging(SimState& st) {
  const Constants& c = st.scenario().constants;
  const double knee = 0.8 * c.full_range_km;
  for (Vehicle& v : st.vehicles) {
    if (v.status != VehicleStatus::Charging) continue;
    const double rate = v.range_km < knee ? c.charge_fast_km_per_step : 0.5 * c.charge_fast_km_per_step;
    v.range_km = std::min(c.full_range_km, v.range_km + rate);
    if (v.range_km >= c.full_range_km) v.status = VehicleStatus::Parked;
  }
}

namespace {

void process_arrivals(SimState& st) {
  retry_queued(st);
  while (!st.arrivals.empty() && st.arrivals.top().step <= st.step) {
    const int idx = st.arrivals.top().order;
    st.arrivals.pop();
    complete_arrival(st, idx);
  }
}

void record_parked(SimState& st) {
  for (std::size_t s = 0; s < st.docked.size(); ++s) {
    const auto& list = st.docked[s];
    if (list.empty()) continue;
    auto& t = st.tallies.stations[s];
    t.parked_vehicle_steps += static_cast<double>(list.size());
    for (int vid : list) t.parked_range_sum += st.vehicles[vid].range_km;
  }
}

}  // namespace

DayTallies run_day(SimState& st, const DeploymentSnapshot& snapshot, DayRngs& rngs, const StepObserver& observer) {
  const Scenario& sc = st.scenario();
  st.begin_day(snapshot.day);
  apply_snapshot(st, snapshot, rngs.alloc);
  st.tallies.cost = snapshot_cost(snapshot, sc.pool);

  std::vector<DemandEvent> events;
  for (int k = 0; k < kStepsPerDay; ++k) {
    st.step = st.day * kStepsPerDay + k;
    events.clear();
    sample_demand(sc, st.day, k, rngs.demand, events);
    for (const DemandEvent& e : events) {
      ++st.tallies.total_demand;
      ++st.tallies.stations[e.origin].pickups_intent;
      ++st.tallies.stations[e.dest].returns_intent;
      try_accept_order(st, e);
    }
    process_arrivals(st);
    tick_charging(st);
    record_parked(st);
    if (observer) observer(st);
  }
  return st.tallies;
}

void drain_arrivals(SimState& st, const StepObserver& observer) {
  while (!st.arrivals.empty()) {
    ++st.step;
    process_arrivals(st);
    tick_charging(st);
    if (observer) observer(st);
  }
}

EpisodeResult run_closed_loop(const Scenario& sc, Planner& planner, const std::vector<StationId>& initial,
                              std::uint64_t seed, const EpisodeOptions& options) {
  SimState st(sc);
  DayRngs rngs{Rng(derive_seed(seed, 1)), Rng(derive_seed(seed, 2))};
  Rng planner_rng(derive_seed(seed, 3));

  EpisodeResult result;
  result.plan.initial = DeploymentSnapshot::make(0, initial);
  if (options.warmup) {
    DayTallies t = run_day(st, result.plan.initial, rngs, options.observer);
    result.history.push_back({result.plan.initial, std::move(t)});
  } else {
    st.begin_day(0);
    apply_snapshot(st, result.plan.initial, rngs.alloc);
  }

  std::vector<StationId> current = result.plan.initial.active;
  std::vector<DayMetrics> days;
  for (int day = 1; day <= sc.episode_days; ++day) {
    PlanningContext ctx{sc, st, day, result.history, current, planner_rng};
    DeploymentSnapshot snap = DeploymentSnapshot::make(day, planner.plan_day(ctx));
    run_day(st, snap, rngs, options.observer);
    if (day == sc.episode_days) drain_arrivals(st, options.observer);
    DayRecord record{snap, st.tallies};
    days.push_back(day_metrics(snap, record.tallies, sc.pool));
    result.history.push_back(record);
    planner.after_day(ctx, result.history.back());
    current = snap.active;
    result.plan.snapshots.push_back(std::move(snap));
  }
  result.report = make_report(std::move(days), options.w);
  return result;
}

EpisodeResult run_episode(const Scenario& sc, const DeploymentPlan& plan, std::uint64_t seed,
                          const EpisodeOptions& options) {
  const auto issues = validate_plan(plan, sc.pool, sc.episode_days);
  if (!issues.empty()) {
    std::string msg = "invalid plan:";
    for (const auto& i : issues) msg += " [day " + std::to_string(i.day) + "] " + i.message + ";";
    throw ValidationError(msg);
  }
  FixedPlanPlanner planner(plan);
  return run_closed_loop(sc, planner, plan.initial.active, seed, options);
}

}  // namespace emob
