#include "emob/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace emob {
namespace {

constexpr double kPi = 3.14159265358979323846;

double gauss2d(Point p, Point c, double sigma) {
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

struct Peak {
  double hour;
  double sigma_h;
  double weight;
};

std::array<double, kStepsPerDay> build_profile(std::initializer_list<Peak> peaks, double floor) {
  std::array<double, kStepsPerDay> prof{};
  for (int k = 0; k < kStepsPerDay; ++k) {
    const double h = (k + 0.5) / 6.0;
    double v = floor / 24.0;
    for (const Peak& pk : peaks) {
      // wrap-around distance in hours
      double d = std::fabs(h - pk.hour);
      d = std::min(d, 24.0 - d);
      v += pk.weight * std::exp(-d * d / (2 * pk.sigma_h * pk.sigma_h)) / (pk.sigma_h * std::sqrt(2 * kPi));
    }
    prof[k] = v;
  }
  const double total = std::accumulate(prof.begin(), prof.end(), 0.0);
  for (double& v : prof) v /= total;
  return prof;
}

const char* kind_name(DemandKind k) {
  switch (k) {
    case DemandKind::Business: return "business";
    case DemandKind::Residential: return "residential";
    case DemandKind::Leisure: return "leisure";
    case DemandKind::Background: return "background";
  }
  return "background";
}

DemandKind kind_from(const std::string& s) {
  if (s == "business") return DemandKind::Business;
  if (s == "residential") return DemandKind::Residential;
  if (s == "leisure") return DemandKind::Leisure;
  if (s == "background") return DemandKind::Background;
  throw ValidationError("unknown demand kind '" + s + "'");
}

Point clamp_to_city(Point p, double city, double margin) {
  return {std::clamp(p.x, margin, city - margin), std::clamp(p.y, margin, city - margin)};
}

struct Cluster {
  Point c;
  double sigma;
  double weight;
};

Point draw_clustered(Rng& rng, const std::vector<Cluster>& clusters, double uniform_share, double city) {
  for (;;) {
    Point p;
    if (uniform01(rng) < uniform_share) {
      p = {uniform(rng, 0, city), uniform(rng, 0, city)};
    } else {
      double total = 0;
      for (const auto& c : clusters) total += c.weight;
      double u = uniform01(rng) * total;
      std::size_t k = 0;
      while (k + 1 < clusters.size() && u > clusters[k].weight) {
        u -= clusters[k].weight;
        ++k;
      }
      p = {clusters[k].c.x + clusters[k].sigma * normal(rng), clusters[k].c.y + clusters[k].sigma * normal(rng)};
    }
    if (p.x >= 0.2 && p.y >= 0.2 && p.x <= city - 0.2 && p.y <= city - 0.2) return p;
  }
}

}  // namespace

DayType day_type(int day) {
  const int dow = ((day - 1) % 7 + 7) % 7;  // 0 = Monday
  return dow >= 5 ? DayType::Weekend : DayType::Weekday;
}

const std::array<double, kStepsPerDay>& time_profile(DemandKind kind) {
  static const auto business = build_profile({{8.5, 1.0, 0.15}, {12.5, 1.0, 0.15}, {18.0, 1.5, 0.6}}, 0.1);
  static const auto residential = build_profile({{8.0, 1.2, 0.55}, {12.5, 2.0, 0.1}, {19.0, 1.5, 0.15}}, 0.2);
  static const auto leisure = build_profile({{14.0, 3.0, 0.5}, {20.0, 2.0, 0.3}}, 0.2);
  static const auto background = build_profile({{13.0, 4.0, 0.8}}, 0.2);
  switch (kind) {
    case DemandKind::Business: return business;
    case DemandKind::Residential: return residential;
    case DemandKind::Leisure: return leisure;
    case DemandKind::Background: return background;
  }
  return background;
}

double day_factor(DemandKind kind, DayType type) {
  const bool weekend = type == DayType::Weekend;
  switch (kind) {
    case DemandKind::Business: return weekend ? 0.35 : 1.0;
    case DemandKind::Residential: return weekend ? 0.8 : 1.0;
    case DemandKind::Leisure: return weekend ? 1.6 : 0.6;
    case DemandKind::Background: return 1.0;
  }
  return 1.0;
}

double DemandField::daily_rate(Point p, DayType type, int day) const {
  double r = background_rate * day_factor(DemandKind::Background, type);
  for (const auto& b : bumps)
    if (day >= b.first_day) r += b.daily_rate * day_factor(b.kind, type) * gauss2d(p, b.center, b.sigma_km);
  return r;
}

double DemandField::origin_intensity(int step_of_day, DayType type, Point p, int day) const {
  double r = background_rate * day_factor(DemandKind::Background, type) *
             time_profile(DemandKind::Background)[step_of_day];
  for (const auto& b : bumps)
    if (day >= b.first_day)
      r += b.daily_rate * day_factor(b.kind, type) * gauss2d(p, b.center, b.sigma_km) *
           time_profile(b.kind)[step_of_day];
  return r;
}

double DemandField::attraction(Point p, int hour) const {
  double max_rate = 0;
  for (const auto& b : bumps) max_rate = std::max(max_rate, b.daily_rate);
  if (max_rate <= 0) max_rate = 1;
  double a = od_base_attraction;
  for (const auto& b : bumps) {
    double m = 1.0;
    switch (b.kind) {
      case DemandKind::Business: m = (hour >= 6 && hour < 11) ? 1.5 : 0.4; break;
      case DemandKind::Residential: m = (hour >= 16 && hour < 22) ? 1.5 : 0.5; break;
      case DemandKind::Leisure: m = (hour >= 11 && hour < 21) ? 1.2 : 0.3; break;
      case DemandKind::Background: m = 1.0; break;
    }
    a += m * (b.daily_rate / max_rate) * gauss2d(p, b.center, b.sigma_km);
  }
  return a;
}

// --- config ------------------------------------------------------------------

static nlohmann::json constants_json(const Constants& c) {
  return {{"per_minute_rate", c.per_minute_rate},
          {"speed_kmh", c.speed_kmh},
          {"detour_factor", c.detour_factor},
          {"cost_scale", c.cost_scale},
          {"full_range_km", c.full_range_km},
          {"charge_fast_km_per_step", c.charge_fast_km_per_step},
          {"reposition_radius_km", c.reposition_radius_km},
          {"alloc_min", c.alloc_min},
          {"alloc_max", c.alloc_max}};
}

static Constants constants_from(const nlohmann::json& j, Constants c = {}) {
  c.per_minute_rate = j.value("per_minute_rate", c.per_minute_rate);
  c.speed_kmh = j.value("speed_kmh", c.speed_kmh);
  c.detour_factor = j.value("detour_factor", c.detour_factor);
  c.cost_scale = j.value("cost_scale", c.cost_scale);
  c.full_range_km = j.value("full_range_km", c.full_range_km);
  c.charge_fast_km_per_step = j.value("charge_fast_km_per_step", c.charge_fast_km_per_step);
  c.reposition_radius_km = j.value("reposition_radius_km", c.reposition_radius_km);
  c.alloc_min = j.value("alloc_min", c.alloc_min);
  c.alloc_max = j.value("alloc_max", c.alloc_max);
  const double vals[] = {c.per_minute_rate, c.speed_kmh, c.detour_factor, c.cost_scale, c.full_range_km,
                         c.charge_fast_km_per_step, c.reposition_radius_km, c.alloc_min, c.alloc_max};
  for (double v : vals)
    if (!(v > 0)) throw ValidationError("scenario constants must be positive");
  return c;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.city_km = j.value("city_km", c.city_km);
  c.n_stations = j.value("n_stations", c.n_stations);
  c.region_size = j.value("region_size", c.region_size);
  c.n_pois = j.value("n_pois", c.n_pois);
  c.episode_days = j.value("episode_days", c.episode_days);
  c.initial_fraction = j.value("initial_fraction", c.initial_fraction);
  c.demand_scale = j.value("demand_scale", c.demand_scale);
  if (j.contains("constants")) c.constants = constants_from(j.at("constants"));
  return c;
}

nlohmann::json ScenarioConfig::to_json() const {
  return {{"city_km", city_km},         {"n_stations", n_stations},
          {"region_size", region_size}, {"n_pois", n_pois},
          {"episode_days", episode_days}, {"initial_fraction", initial_fraction},
          {"demand_scale", demand_scale}, {"constants", constants_json(constants)}};
}

// --- generation ----------------------------------------------------------------

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  if (config.n_stations < 2) throw ValidationError("need at least two stations");
  if (config.region_size < 1 || config.n_stations % config.region_size != 0)
    throw ValidationError("n_stations (" + std::to_string(config.n_stations) +
                          ") is not divisible by region_size (" + std::to_string(config.region_size) + ")");
  if (config.episode_days < 1) throw ValidationError("episode_days must be >= 1");
  if (!(config.city_km > 1.0)) throw ValidationError("city_km must exceed 1 km");

  Rng rng(seed);
  const double city = config.city_km;
  const Point center{city / 2, city / 2};

  Scenario sc;
  sc.seed = seed;
  sc.episode_days = config.episode_days;
  sc.region_size = config.region_size;
  sc.constants = constants_from(constants_json(config.constants));
  sc.pool.city_km = city;

  // Settlement clusters: a dense core plus satellite towns on a ring.
  std::vector<Cluster> clusters{{center, city * 0.09, 3.0}};
  const int n_sat = 6;
  for (int i = 0; i < n_sat; ++i) {
    const double ang = 2 * kPi * i / n_sat + uniform(rng, -0.3, 0.3);
    const double rad = city * uniform(rng, 0.22, 0.36);
    clusters.push_back({clamp_to_city({center.x + rad * std::cos(ang), center.y + rad * std::sin(ang)}, city, 1.0),
                        city * uniform(rng, 0.05, 0.08), uniform(rng, 0.8, 1.5)});
  }

  // Property prices: radial core plus a few random hills.
  struct Hill {
    Point c;
    double s, a;
  };
  std::vector<Hill> hills{{center, city / 4, 1.5}};
  for (int i = 0; i < 3; ++i)
    hills.push_back({{uniform(rng, 0, city), uniform(rng, 0, city)}, uniform(rng, 1.5, 3.0), uniform(rng, 0.3, 0.8)});
  sc.pool.price.city_km = city;
  sc.pool.price.n = static_cast<int>(std::lround(city * 2)) + 1;
  sc.pool.price.values.resize(static_cast<std::size_t>(sc.pool.price.n) * sc.pool.price.n);
  const double cell = city / (sc.pool.price.n - 1);
  for (int iy = 0; iy < sc.pool.price.n; ++iy)
    for (int ix = 0; ix < sc.pool.price.n; ++ix) {
      const Point p{ix * cell, iy * cell};
      double v = 0.5;
      for (const auto& h : hills) v += h.a * gauss2d(p, h.c, h.s);
      sc.pool.price.values[static_cast<std::size_t>(iy) * sc.pool.price.n + ix] = v;
    }

  for (int i = 0; i < config.n_stations; ++i) {
    Station s;
    s.id = i;
    s.loc = draw_clustered(rng, clusters, 0.3, city);
    s.docks = 6 + uniform_index(rng, 15);
    s.daily_cost = Money::from_units(sc.constants.cost_scale * sc.pool.price.at(s.loc) * s.docks);
    if (s.daily_cost.milli <= 0) s.daily_cost.milli = 1;
    sc.pool.stations.push_back(s);
  }
  for (int i = 0; i < config.n_pois; ++i) sc.pool.pois.push_back(draw_clustered(rng, clusters, 0.1, city));

  // Demand: business districts in the core, residential satellites, a couple
  // of leisure spots with weekend peaks.
  const double scale = config.demand_scale;
  for (int i = 0; i < 2; ++i)
    sc.demand.bumps.push_back({clamp_to_city({center.x + uniform(rng, -2, 2), center.y + uniform(rng, -2, 2)}, city, 0.5),
                               uniform(rng, 0.8, 1.2), scale * uniform(rng, 45, 60), DemandKind::Business, 0});
  for (std::size_t k = 1; k < clusters.size(); ++k)
    sc.demand.bumps.push_back({clusters[k].c, uniform(rng, 0.8, 1.3), scale * uniform(rng, 20, 35),
                               DemandKind::Residential, 0});
  for (int i = 0; i < 2; ++i) {
    const auto& host = clusters[1 + uniform_index(rng, n_sat)];
    sc.demand.bumps.push_back({clamp_to_city({host.c.x + uniform(rng, -2, 2), host.c.y + uniform(rng, -2, 2)}, city, 0.5),
                               uniform(rng, 0.6, 1.0), scale * uniform(rng, 30, 45), DemandKind::Leisure, 0});
  }
  sc.demand.background_rate = scale * 0.3;
  sc.demand.od_decay_km = 2.0;
  sc.demand.od_base_attraction = 0.05;

  // Initial deployment: demand-weighted draw without replacement, the way an
  // operator would roll out the first batch.
  const int k0 = std::clamp(static_cast<int>(std::lround(config.initial_fraction * config.n_stations)), 0,
                            config.n_stations);
  std::vector<double> weight(config.n_stations);
  for (int i = 0; i < config.n_stations; ++i) {
    const Point p = sc.pool.stations[i].loc;
    weight[i] = 0.5 * (sc.demand.daily_rate(p, DayType::Weekday, 0) + sc.demand.daily_rate(p, DayType::Weekend, 0)) + 1.0;
  }
  for (int picked = 0; picked < k0; ++picked) {
    double total = 0;
    for (double v : weight) total += v;
    double u = uniform01(rng) * total;
    int chosen = 0;
    for (int i = 0; i < config.n_stations; ++i) {
      if (weight[i] <= 0) continue;
      chosen = i;
      if (u < weight[i]) break;
      u -= weight[i];
    }
    sc.initial_active.push_back(chosen);
    weight[chosen] = 0;
  }
  std::sort(sc.initial_active.begin(), sc.initial_active.end());

  sc.finalize();
  return sc;
}

// --- derived tables ----------------------------------------------------------------

void Scenario::fill_rates(int day, int step_of_day, std::vector<double>& out) const {
  const DayType type = day_type(day);
  out.resize(pool.size());
  for (std::size_t s = 0; s < pool.size(); ++s)
    out[s] = demand.origin_intensity(step_of_day, type, pool.stations[s].loc, day);
}

void Scenario::finalize() {
  pool.check_invariants();
  pool.build_index();
  for (StationId id : initial_active)
    if (!pool.contains(id)) throw ValidationError("initial snapshot references unknown station");
  const std::size_t n = pool.size();

  rates_.assign(static_cast<std::size_t>(episode_days + 1) * kStepsPerDay * n, 0.0);
  exp_neg_.resize(rates_.size());
  std::vector<double> buf;
  for (int day = 0; day <= episode_days; ++day)
    for (int k = 0; k < kStepsPerDay; ++k) {
      fill_rates(day, k, buf);
      const std::size_t base = (static_cast<std::size_t>(day) * kStepsPerDay + k) * n;
      for (std::size_t s = 0; s < n; ++s) {
        if (!std::isfinite(buf[s]) || buf[s] < 0) throw ValidationError("demand intensity must be finite and >= 0");
        rates_[base + s] = buf[s];
        exp_neg_[base + s] = std::exp(-buf[s]);
      }
    }

  trip_km_.resize(n * n);
  trip_steps_.resize(n * n);
  for (std::size_t o = 0; o < n; ++o)
    for (std::size_t d = 0; d < n; ++d) {
      const double km = constants.detour_factor * distance(pool.stations[o].loc, pool.stations[d].loc);
      const double minutes = km / constants.speed_kmh * 60.0;
      trip_km_[o * n + d] = km;
      trip_steps_[o * n + d] = std::max(1, static_cast<int>(std::ceil(minutes / kMinutesPerStep - 1e-9)));
    }

  od_prob_.assign(24 * n * n, 0.0);
  od_cdf_.assign(24 * n * n, 0.0);
  std::vector<double> attract(n);
  for (int h = 0; h < 24; ++h) {
    for (std::size_t d = 0; d < n; ++d) attract[d] = demand.attraction(pool.stations[d].loc, h);
    for (std::size_t o = 0; o < n; ++o) {
      double* row = &od_prob_[(h * n + o) * n];
      double total = 0;
      for (std::size_t d = 0; d < n; ++d) {
        const double km = distance(pool.stations[o].loc, pool.stations[d].loc);
        row[d] = attract[d] * (km + 0.5) * std::exp(-km / demand.od_decay_km);
        total += row[d];
      }
      double* cdf = &od_cdf_[(h * n + o) * n];
      double acc = 0;
      for (std::size_t d = 0; d < n; ++d) {
        row[d] /= total;
        acc += row[d];
        cdf[d] = acc;
      }
      cdf[n - 1] = 1.0;
    }
  }

  order_value_.assign(n, 0.0);
  const double step_price = price_per_step().units();
  for (std::size_t o = 0; o < n; ++o) {
    // Hourly expectation weighted by day-1 rates.
    double wsum = 0, vsum = 0;
    for (int h = 0; h < 24; ++h) {
      double wh = 0;
      for (int k = h * 6; k < h * 6 + 6; ++k)
        wh += rates_[(static_cast<std::size_t>(episode_days >= 1 ? 1 : 0) * kStepsPerDay + k) * n + o];
      wh += 1e-12;
      const double* row = &od_prob_[(h * n + o) * n];
      double ev = 0;
      for (std::size_t d = 0; d < n; ++d)
        if (d != o) ev += row[d] * trip_steps_[o * n + d] * step_price;
      vsum += wh * ev;
      wsum += wh;
    }
    order_value_[o] = vsum / wsum;
  }
}

std::span<const double> Scenario::step_rates(int day, int step_of_day, std::vector<double>& scratch) const {
  if (tabulated(day)) {
    const std::size_t n = pool.size();
    return {&rates_[(static_cast<std::size_t>(day) * kStepsPerDay + step_of_day) * n], n};
  }
  fill_rates(day, step_of_day, scratch);
  return scratch;
}

std::span<const double> Scenario::step_exp_neg(int day, int step_of_day) const {
  const std::size_t n = pool.size();
  return {&exp_neg_[(static_cast<std::size_t>(day) * kStepsPerDay + step_of_day) * n], n};
}

std::span<const double> Scenario::od_row(StationId origin, int step_of_day) const {
  const std::size_t n = pool.size();
  const std::size_t h = static_cast<std::size_t>(step_of_day / 6);
  return {&od_prob_[(h * n + origin) * n], n};
}

StationId Scenario::sample_destination(StationId origin, int step_of_day, Rng& rng) const {
  const std::size_t n = pool.size();
  const std::size_t h = static_cast<std::size_t>(step_of_day / 6);
  const double* cdf = &od_cdf_[(h * n + origin) * n];
  const double u = uniform01(rng);
  const double* it = std::upper_bound(cdf, cdf + n, u);
  return static_cast<StationId>(std::min<std::ptrdiff_t>(it - cdf, static_cast<std::ptrdiff_t>(n) - 1));
}

Money Scenario::price_per_step() const {
  return Money{std::llround(constants.per_minute_rate * 1000.0) * kMinutesPerStep};
}

Money Scenario::trip_price(StationId o, StationId d) const {
  return Money{price_per_step().milli * trip_steps(o, d)};
}

double Scenario::expected_daily_pickups(StationId s, int day) const {
  return demand.daily_rate(pool.stations[s].loc, day_type(day), day);
}

double Scenario::expected_weekly_mean_pickups(StationId s) const {
  const Point p = pool.stations[s].loc;
  return (5 * demand.daily_rate(p, DayType::Weekday, 0) + 2 * demand.daily_rate(p, DayType::Weekend, 0)) / 7.0;
}

// --- demand sampling ------------------------------------------------------------

void sample_demand(const Scenario& scenario, int day, int step_of_day, Rng& rng, std::vector<DemandEvent>& out) {
  const std::size_t n = scenario.pool.size();
  const int global = day * kStepsPerDay + step_of_day;
  thread_local std::vector<double> scratch;
  const auto rates = scenario.step_rates(day, step_of_day, scratch);
  const bool tab = scenario.tabulated(day);
  std::span<const double> expn;
  if (tab) expn = scenario.step_exp_neg(day, step_of_day);
  for (std::size_t s = 0; s < n; ++s) {
    const double lam = rates[s];
    if (lam <= 0) continue;
    const int count = tab ? poisson_inverse(rng, lam, expn[s]) : poisson(rng, lam);
    for (int c = 0; c < count; ++c) {
      const auto origin = static_cast<StationId>(s);
      StationId dest = scenario.sample_destination(origin, step_of_day, rng);
      if (dest == origin) dest = scenario.sample_destination(origin, step_of_day, rng);
      if (dest == origin) continue;
      out.push_back({global, origin, dest});
    }
  }
}

std::vector<DemandEvent> sample_demand(const Scenario& scenario, int day, int step_of_day, Rng& rng) {
  std::vector<DemandEvent> out;
  sample_demand(scenario, day, step_of_day, rng, out);
  return out;
}

// --- serialization ---------------------------------------------------------------

nlohmann::json Scenario::to_json() const {
  nlohmann::json stations = nlohmann::json::array();
  for (const auto& s : pool.stations)
    stations.push_back({{"id", s.id}, {"x", s.loc.x}, {"y", s.loc.y}, {"docks", s.docks},
                        {"daily_cost_milli", s.daily_cost.milli}});
  nlohmann::json pois = nlohmann::json::array();
  for (const auto& p : pool.pois) pois.push_back({p.x, p.y});
  nlohmann::json bumps = nlohmann::json::array();
  for (const auto& b : demand.bumps)
    bumps.push_back({{"x", b.center.x}, {"y", b.center.y}, {"sigma_km", b.sigma_km}, {"daily_rate", b.daily_rate},
                     {"kind", kind_name(b.kind)}, {"first_day", b.first_day}});
  return {{"format", "emob-scenario/1"},
          {"seed", seed},
          {"episode_days", episode_days},
          {"region_size", region_size},
          {"city_km", pool.city_km},
          {"constants", constants_json(constants)},
          {"stations", stations},
          {"pois", pois},
          {"price_grid", {{"n", pool.price.n}, {"values", pool.price.values}}},
          {"intensity_spec", {{"bumps", bumps}, {"background_rate", demand.background_rate}}},
          {"od_spec", {{"decay_km", demand.od_decay_km}, {"base_attraction", demand.od_base_attraction}}},
          {"initial_active", initial_active}};
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.episode_days = j.at("episode_days").get<int>();
  sc.region_size = j.value("region_size", 1);
  if (sc.episode_days < 1) throw ValidationError("episode_days must be >= 1");
  sc.pool.city_km = j.at("city_km").get<double>();
  sc.constants = constants_from(j.at("constants"));
  for (const auto& s : j.at("stations")) {
    Station st;
    st.id = s.at("id").get<int>();
    st.loc = {s.at("x").get<double>(), s.at("y").get<double>()};
    st.docks = s.at("docks").get<int>();
    st.daily_cost = Money{s.at("daily_cost_milli").get<std::int64_t>()};
    sc.pool.stations.push_back(st);
  }
  for (const auto& p : j.at("pois")) sc.pool.pois.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  sc.pool.price.city_km = sc.pool.city_km;
  sc.pool.price.n = j.at("price_grid").at("n").get<int>();
  sc.pool.price.values = j.at("price_grid").at("values").get<std::vector<double>>();
  for (const auto& b : j.at("intensity_spec").at("bumps"))
    sc.demand.bumps.push_back({{b.at("x").get<double>(), b.at("y").get<double>()},
                               b.at("sigma_km").get<double>(),
                               b.at("daily_rate").get<double>(),
                               kind_from(b.at("kind").get<std::string>()),
                               b.value("first_day", 0)});
  sc.demand.background_rate = j.at("intensity_spec").value("background_rate", 0.0);
  sc.demand.od_decay_km = j.at("od_spec").at("decay_km").get<double>();
  sc.demand.od_base_attraction = j.at("od_spec").at("base_attraction").get<double>();
  sc.initial_active = j.value("initial_active", std::vector<StationId>{});
  sc.finalize();
  return sc;
}

std::string Scenario::dump() const { return to_json().dump(1); }

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed scenario file " + path + ": " + e.what());
  }
  try {
    return Scenario::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid scenario file " + path + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << scenario.dump() << '\n';
}

}  // namespace emob
