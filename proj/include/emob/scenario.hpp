#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "emob/domain.hpp"
#include "emob/rng.hpp"

namespace emob {

struct Constants {
  double per_minute_rate = 0.5;  // money per rental minute
  double speed_kmh = 30.0;
  double detour_factor = 1.3;
  double cost_scale = 3.0;  // daily_cost = cost_scale * price(loc) * docks
  double full_range_km = 80.0;
  double charge_fast_km_per_step = 4.0;  // below 80% of full range; half above
  double reposition_radius_km = 3.0;
  double alloc_min = 0.5;  // fraction of docks filled on opening
  double alloc_max = 0.7;
};

enum class DemandKind { Business, Residential, Leisure, Background };
enum class DayType { Weekday, Weekend };

/// Day 1 is a Monday; day 0 (warm-up) is the preceding Sunday.
DayType day_type(int day);

struct DemandBump {
  Point center;
  double sigma_km = 1.0;
  double daily_rate = 0.0;  // expected daily pick-ups at a station on the bump center
  DemandKind kind = DemandKind::Residential;
  int first_day = 0;  // bump contributes from this day on
};

/// Ground-truth spatio-temporal demand: origin intensity and a
/// time-dependent origin-destination kernel.
struct DemandField {
  std::vector<DemandBump> bumps;
  double background_rate = 0.0;  // daily pick-ups everywhere
  double od_decay_km = 2.5;
  double od_base_attraction = 0.05;

  /// Expected daily pick-ups at `p`.
  double daily_rate(Point p, DayType type, int day) const;
  /// Expected pick-ups in one ten-minute step at `p`.
  double origin_intensity(int step_of_day, DayType type, Point p, int day = 0) const;
  /// Relative destination attractiveness of `p` during `hour`.
  double attraction(Point p, int hour) const;
};

/// Fraction of a kind's daily demand that falls into each step; sums to 1.
const std::array<double, kStepsPerDay>& time_profile(DemandKind kind);
double day_factor(DemandKind kind, DayType type);

struct ScenarioConfig {
  double city_km = 16.0;
  int n_stations = 200;
  int region_size = 20;
  int n_pois = 600;
  int episode_days = 14;
  double initial_fraction = 0.4;
  double demand_scale = 1.0;  // multiplies every bump rate
  Constants constants;

  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct DemandEvent {
  int step = 0;  // global step: day * 144 + step_of_day
  StationId origin = 0;
  StationId dest = 0;
};

class Scenario {
 public:
  CandidatePool pool;
  DemandField demand;
  Constants constants;
  int episode_days = 1;
  int region_size = 1;
  std::uint64_t seed = 0;
  std::vector<StationId> initial_active;

  /// Rebuilds every derived table; call after mutating the public fields.
  void finalize();

  /// Per-station per-step rates for `day`/`step_of_day`; days beyond the
  /// tabulated horizon are computed into `scratch`.
  std::span<const double> step_rates(int day, int step_of_day, std::vector<double>& scratch) const;
  std::span<const double> step_exp_neg(int day, int step_of_day) const;
  bool tabulated(int day) const { return day >= 0 && day <= episode_days; }

  /// Destination distribution for (origin, step); entries sum to 1.
  std::span<const double> od_row(StationId origin, int step_of_day) const;
  StationId sample_destination(StationId origin, int step_of_day, Rng& rng) const;

  double trip_km(StationId o, StationId d) const { return trip_km_[index(o, d)]; }
  int trip_steps(StationId o, StationId d) const { return trip_steps_[index(o, d)]; }
  Money trip_price(StationId o, StationId d) const;
  Money price_per_step() const;
  /// Mean price of a trip starting at `s`, weighted over the day.
  double expected_order_value(StationId s) const { return order_value_[s]; }
  double expected_daily_pickups(StationId s, int day) const;
  /// Expected pick-ups per day averaged over a week (5 weekdays, 2 weekend days).
  double expected_weekly_mean_pickups(StationId s) const;

  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
  std::string dump() const;

 private:
  std::size_t index(StationId o, StationId d) const {
    return static_cast<std::size_t>(o) * pool.size() + static_cast<std::size_t>(d);
  }
  void fill_rates(int day, int step_of_day, std::vector<double>& out) const;

  std::vector<double> rates_;    // [(day * 144 + step) * n + s]
  std::vector<double> exp_neg_;  // exp(-rates_)
  std::vector<double> od_prob_;  // [(hour * n + o) * n + d]
  std::vector<double> od_cdf_;
  std::vector<double> trip_km_;
  std::vector<int> trip_steps_;
  std::vector<double> order_value_;
};

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Appends one step's demand to `out`. For every candidate a Poisson count of
/// origins is drawn; each destination comes from the OD kernel, with a
/// self-loop redrawn once and then dropped.
void sample_demand(const Scenario& scenario, int day, int step_of_day, Rng& rng,
                   std::vector<DemandEvent>& out);
std::vector<DemandEvent> sample_demand(const Scenario& scenario, int day, int step_of_day, Rng& rng);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace emob
