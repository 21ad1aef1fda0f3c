#pragma once

#include <vector>

#include "emob/scenario.hpp"

namespace toy {

struct Spec {
  std::vector<emob::Point> stations;
  int docks = 10;
  double daily_cost = 10.0;
  std::vector<emob::Point> pois;
  double city_km = 10.0;
  int days = 1;
  int region_size = 1;
  std::vector<emob::DemandBump> bumps;
  double background = 0.0;
  emob::Constants constants;
  std::vector<emob::StationId> initial;
  std::uint64_t seed = 1;
};

/// Hand-placed scenario; no generator involved.
inline emob::Scenario make(const Spec& spec) {
  emob::Scenario sc;
  sc.pool.city_km = spec.city_km;
  for (std::size_t i = 0; i < spec.stations.size(); ++i) {
    emob::Station s;
    s.id = static_cast<emob::StationId>(i);
    s.loc = spec.stations[i];
    s.docks = spec.docks;
    s.daily_cost = emob::Money::from_units(spec.daily_cost);
    sc.pool.stations.push_back(s);
  }
  sc.pool.pois = spec.pois;
  sc.pool.price.city_km = spec.city_km;
  sc.pool.price.n = 2;
  sc.pool.price.values = {1, 1, 1, 1};
  sc.demand.bumps = spec.bumps;
  sc.demand.background_rate = spec.background;
  sc.constants = spec.constants;
  sc.episode_days = spec.days;
  sc.region_size = spec.region_size;
  sc.seed = spec.seed;
  sc.initial_active = spec.initial;
  sc.finalize();
  return sc;
}

/// Small generated city for tests that need realistic demand.
inline emob::Scenario small_city(std::uint64_t seed, int n = 40, int region_size = 10, int days = 3) {
  emob::ScenarioConfig cfg;
  cfg.city_km = 8.0;
  cfg.n_stations = n;
  cfg.region_size = region_size;
  cfg.n_pois = 3 * n;
  cfg.episode_days = days;
  return emob::generate_scenario(cfg, seed);
}

}  // namespace toy
