#include "emob/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace emob {

HistoryStats HistoryStats::from_history(const Scenario& scenario, const std::vector<DayRecord>& history, int window) {
  if (window < 1) throw std::invalid_argument("history window must be >= 1");
  const std::size_t n = scenario.pool.size();
  HistoryStats h;
  h.window = window;
  h.net_revenue.assign(n, 0.0);
  h.satisfied.assign(n, 0.0);
  h.pickups.assign(n, 0.0);

  const int first = std::max(0, static_cast<int>(history.size()) - window);
  for (int d = first; d < static_cast<int>(history.size()); ++d) {
    const DayRecord& rec = history[d];
    const auto mask = to_mask(rec.snapshot.active, n);
    const double sys_rate = demand_satisfied_rate(rec.tallies.satisfied, rec.tallies.total_demand);
    for (std::size_t s = 0; s < n; ++s) {
      const StationTally& t = rec.tallies.stations[s];
      const double cost = scenario.pool.stations[s].daily_cost.units();
      const double revenue = mask[s] ? t.revenue.units()
                                     : t.pickups_intent * scenario.expected_order_value(static_cast<StationId>(s)) *
                                           sys_rate;
      h.net_revenue[s] += revenue - cost;
      h.satisfied[s] += t.satisfied;
      h.pickups[s] += t.pickups_intent;
    }
    ++h.days;
  }
  if (h.days > 0) {
    for (std::size_t s = 0; s < n; ++s) {
      h.net_revenue[s] /= h.days;
      h.satisfied[s] /= h.days;
      h.pickups[s] /= h.days;
    }
  }
  return h;
}

int ChurnDist::sample(Rng& rng, int pool_size) const {
  const int cap = static_cast<int>(std::floor(max_fraction * pool_size));
  return std::min(poisson(rng, mean_fraction * pool_size), cap);
}

std::vector<StationId> churn_by_score(const std::vector<StationId>& active, const std::vector<double>& score, int n) {
  const auto mask = to_mask(active, score.size());
  std::vector<StationId> on, off;
  for (StationId s = 0; s < static_cast<StationId>(score.size()); ++s) (mask[s] ? on : off).push_back(s);

  // best first, lower id on ties
  auto better = [&](StationId a, StationId b) { return score[a] != score[b] ? score[a] > score[b] : a < b; };
  // worst first, lower id on ties
  auto worse = [&](StationId a, StationId b) { return score[a] != score[b] ? score[a] < score[b] : a < b; };
  const int n_open = std::clamp(n, 0, static_cast<int>(off.size()));
  const int n_close = std::clamp(n, 0, static_cast<int>(on.size()));
  std::partial_sort(off.begin(), off.begin() + n_open, off.end(), better);
  std::partial_sort(on.begin(), on.begin() + n_close, on.end(), worse);

  std::vector<StationId> next(on.begin() + n_close, on.end());
  next.insert(next.end(), off.begin(), off.begin() + n_open);
  std::sort(next.begin(), next.end());
  return next;
}

std::vector<double> coverage_scores(const CandidatePool& pool, const std::vector<StationId>& active,
                                    const std::vector<double>& pickups) {
  const std::size_t n = pool.size();
  const auto mask = to_mask(active, n);
  // how many active stations cover each POI
  std::vector<int> cover_count(pool.pois.size(), 0);
  for (std::size_t p = 0; p < pool.pois.size(); ++p)
    for (StationId s : pool.stations_of_poi[p]) cover_count[p] += mask[s];

  const double total_pickups = std::accumulate(pickups.begin(), pickups.end(), 0.0);
  const double n_pois = static_cast<double>(pool.pois.size());
  std::vector<double> score(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    int marginal = 0;
    for (int p : pool.pois_of_station[s]) {
      // an active station matters for POIs only it covers; an inactive one for
      // POIs nobody covers yet
      if (mask[s] ? cover_count[p] == 1 : cover_count[p] == 0) ++marginal;
    }
    const double poi_share = n_pois > 0 ? marginal / n_pois : 0.0;
    const double demand_share = total_pickups > 0 ? pickups[s] / total_pickups : 0.0;
    score[s] = 0.5 * (poi_share + demand_share);
  }
  return score;
}

std::vector<StationId> plan_greedy(GreedyKind kind, const Scenario& scenario, const std::vector<StationId>& active,
                                   const HistoryStats& stats, const ChurnDist& churn, Rng& rng) {
  const int n = churn.sample(rng, static_cast<int>(scenario.pool.size()));
  if (stats.days == 0) return active;
  const std::vector<double> score = kind == GreedyKind::Revenue
                                        ? stats.net_revenue
                                        : coverage_scores(scenario.pool, active, stats.pickups);
  return churn_by_score(active, score, n);
}

DeploymentPlan plan_fixed(const std::vector<StationId>& initial, int days) {
  DeploymentPlan plan;
  plan.initial = DeploymentSnapshot::make(0, initial);
  for (int d = 1; d <= days; ++d) plan.snapshots.push_back(DeploymentSnapshot::make(d, initial));
  return plan;
}

namespace {

struct GreedyState {
  const CandidatePool& pool;
  const std::vector<double>& est;
  const OneTimeOptions& opt;
  double total_est = 0;
  std::vector<std::uint8_t> poi_covered;

  double capture(StationId s) const {
    return std::min(est[s], opt.capacity_per_dock * pool.stations[s].docks);
  }
  double gain(StationId s) const {
    double g = 0;
    if (!pool.pois.empty() && opt.poi_weight != 0) {
      int fresh = 0;
      for (int p : pool.pois_of_station[s]) fresh += !poi_covered[p];
      g += opt.poi_weight * fresh / static_cast<double>(pool.pois.size());
    }
    if (total_est > 0 && opt.demand_weight != 0) g += opt.demand_weight * capture(s) / total_est;
    return g;
  }
  void take(StationId s) {
    for (int p : pool.pois_of_station[s]) poi_covered[p] = 1;
  }
};

GreedyState make_state(const CandidatePool& pool, const std::vector<double>& est, const OneTimeOptions& opt) {
  GreedyState g{pool, est, opt, 0.0, std::vector<std::uint8_t>(pool.pois.size(), 0)};
  for (double v : est) g.total_est += std::max(v, 0.0);
  return g;
}

}  // namespace

double one_time_value(const CandidatePool& pool, const std::vector<double>& demand_estimate,
                      const std::vector<StationId>& chosen, const OneTimeOptions& options) {
  GreedyState g = make_state(pool, demand_estimate, options);
  double v = 0;
  for (StationId s : chosen) {
    v += g.gain(s);
    g.take(s);
  }
  return v;
}

std::vector<StationId> plan_one_time(const CandidatePool& pool, const std::vector<double>& demand_estimate,
                                     Money budget, const OneTimeOptions& options, const WarningSink& warn) {
  if (demand_estimate.size() != pool.size()) throw std::invalid_argument("demand estimate size mismatch");
  const std::size_t n = pool.size();
  Money cheapest{std::numeric_limits<std::int64_t>::max()};
  for (const auto& s : pool.stations) cheapest = std::min(cheapest, s.daily_cost);
  if (n == 0 || budget < cheapest) {
    if (warn) warn("budget below the cheapest candidate; deploying nothing");
    return {};
  }

  GreedyState g = make_state(pool, demand_estimate, options);
  std::vector<std::uint8_t> taken(n, 0);
  std::vector<StationId> chosen;
  Money spent;
  while (true) {
    StationId best = -1;
    double best_ratio = 0;
    for (StationId s = 0; s < static_cast<StationId>(n); ++s) {
      if (taken[s] || budget - spent < pool.stations[s].daily_cost) continue;
      const double gain = g.gain(s);
      if (gain <= 1e-15) continue;
      const double cost = pool.stations[s].daily_cost.units();
      const double ratio = cost > 0 ? gain / cost : std::numeric_limits<double>::max();
      if (best < 0 || ratio > best_ratio) {
        best = s;
        best_ratio = ratio;
      }
    }
    if (best < 0) break;
    taken[best] = 1;
    g.take(best);
    spent += pool.stations[best].daily_cost;
    chosen.push_back(best);
  }

  // Cost-ratio greedy can starve on one expensive, valuable station.
  StationId single = -1;
  double single_value = 0;
  GreedyState empty = make_state(pool, demand_estimate, options);
  for (StationId s = 0; s < static_cast<StationId>(n); ++s) {
    if (budget < pool.stations[s].daily_cost) continue;
    const double v = empty.gain(s);
    if (v > single_value) {
      single = s;
      single_value = v;
    }
  }
  if (single >= 0 && single_value > one_time_value(pool, demand_estimate, chosen, options)) chosen = {single};

  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<double> rolling_demand_estimate(const Scenario& scenario, const std::vector<DayRecord>& history,
                                            int window) {
  const std::size_t n = scenario.pool.size();
  if (history.empty()) {
    std::vector<double> prior(n);
    for (std::size_t s = 0; s < n; ++s) prior[s] = scenario.expected_weekly_mean_pickups(static_cast<StationId>(s));
    return prior;
  }
  return HistoryStats::from_history(scenario, history, window).pickups;
}

Money estimate_fixed_daily_gmv(const Scenario& scenario, std::uint64_t seed) {
  FixedPlanner fd(scenario.initial_active);
  const EpisodeResult r = run_closed_loop(scenario, fd, scenario.initial_active, seed);
  if (r.report.per_day.empty()) return Money{};
  return Money{r.report.episode.gmv.milli / static_cast<std::int64_t>(r.report.per_day.size())};
}

std::vector<StationId> GreedyChurnPlanner::plan_day(PlanningContext& ctx) {
  const HistoryStats stats = HistoryStats::from_history(ctx.scenario, ctx.history, window_);
  return plan_greedy(kind_, ctx.scenario, ctx.current, stats, churn_, ctx.rng);
}

std::vector<StationId> IncrementalPlanner::plan_day(PlanningContext& ctx) {
  const auto estimate = rolling_demand_estimate(ctx.scenario, ctx.history, window_);
  const Money budget = ctx.history.empty() ? snapshot_cost(DeploymentSnapshot::make(ctx.day, ctx.current),
                                                           ctx.scenario.pool)
                                           : ctx.history.back().tallies.gmv;
  return plan_one_time(ctx.scenario.pool, estimate, budget, options_, warn_);
}

std::unique_ptr<Planner> make_baseline(const std::string& name, const Scenario& scenario,
                                       const BaselineOptions& options) {
  if (name == "fd") return std::make_unique<FixedPlanner>(scenario.initial_active);
  if (name == "rev") return std::make_unique<GreedyChurnPlanner>(GreedyKind::Revenue, options.churn, options.window);
  if (name == "cov") return std::make_unique<GreedyChurnPlanner>(GreedyKind::Coverage, options.churn, options.window);
  if (name == "oo") {
    std::vector<double> est(scenario.pool.size());
    for (std::size_t s = 0; s < est.size(); ++s) est[s] = scenario.expected_weekly_mean_pickups(static_cast<StationId>(s));
    const Money budget = options.oo_budget.milli >= 0 ? options.oo_budget
                                                      : estimate_fixed_daily_gmv(scenario, derive_seed(scenario.seed, 77));
    return std::make_unique<OneTimePlanner>(plan_one_time(scenario.pool, est, budget, options.one_time, options.warn));
  }
  if (name == "io") return std::make_unique<IncrementalPlanner>(options.one_time, options.window, options.warn);
  throw ValidationError("unknown planner: " + name);
}

}  // namespace emob
