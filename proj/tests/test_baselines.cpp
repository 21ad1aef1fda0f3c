#include <doctest.h>

#include <cmath>
#include <numeric>

#include "emob/baselines.hpp"
#include "toy.hpp"

using namespace emob;

namespace {

/// Best pure-coverage value over all subsets within budget.
double brute_force_coverage(const CandidatePool& pool, Money budget, const OneTimeOptions& opt) {
  const int n = static_cast<int>(pool.size());
  const std::vector<double> zero(n, 0.0);
  double best = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Money cost;
    std::vector<StationId> ids;
    for (int s = 0; s < n; ++s)
      if (mask >> s & 1u) {
        ids.push_back(s);
        cost += pool.stations[s].daily_cost;
      }
    if (cost > budget) continue;
    best = std::max(best, one_time_value(pool, zero, ids, opt));
  }
  return best;
}

Scenario random_instance(Rng& rng, int n, int pois) {
  toy::Spec spec;
  for (int i = 0; i < n; ++i) spec.stations.push_back({uniform(rng, 0.5, 4.5), uniform(rng, 0.5, 4.5)});
  for (int p = 0; p < pois; ++p) spec.pois.push_back({uniform(rng, 0, 5), uniform(rng, 0, 5)});
  spec.city_km = 5;
  Scenario sc = toy::make(spec);
  for (auto& s : sc.pool.stations) s.daily_cost = Money::from_units(uniform(rng, 1, 10));
  return sc;
}

}  // namespace

TEST_CASE("fixed deployment") {
  const DeploymentPlan p = plan_fixed({1, 2}, 3);
  REQUIRE(p.days() == 3);
  for (int d = 0; d < 3; ++d) {
    CHECK(p.snapshots[d].active == std::vector<StationId>{1, 2});
    CHECK(p.snapshots[d].day == d + 1);
  }
  for (int d = 1; d < 3; ++d) {
    const auto diff = snapshot_diff(p.snapshots[d - 1], p.snapshots[d]);
    CHECK(diff.opened.empty());
    CHECK(diff.closed.empty());
  }
  const DeploymentPlan e = plan_fixed({}, 2);
  CHECK(e.snapshots[0].active.empty());
  CHECK(e.snapshots[1].active.empty());
}

TEST_CASE("churn by score") {
  // means (5, 1, 9); 0 and 1 active, 2 inactive
  CHECK(churn_by_score({0, 1}, {5, 1, 9}, 1) == std::vector<StationId>{0, 2});
  CHECK(churn_by_score({0, 1}, {5, 1, 9}, 0) == std::vector<StationId>{0, 1});
  // n beyond availability is clipped on each side
  CHECK(churn_by_score({0, 1}, {5, 1, 9}, 5) == std::vector<StationId>{2});
  // ties go to the lower id
  CHECK(churn_by_score({0}, {1, 2, 2}, 1) == std::vector<StationId>{1});
}

TEST_CASE("greedy planners") {
  const Scenario sc = toy::small_city(2, 40, 10);
  HistoryStats stats;
  stats.days = 1;
  stats.net_revenue.assign(sc.pool.size(), 0.0);
  stats.pickups.assign(sc.pool.size(), 1.0);
  stats.satisfied.assign(sc.pool.size(), 0.0);
  for (std::size_t s = 0; s < sc.pool.size(); ++s) stats.net_revenue[s] = static_cast<double>(s % 7);

  SUBCASE("no churn leaves the snapshot alone") {
    Rng rng(1);
    const ChurnDist none{0.0, 0.1};
    CHECK(plan_greedy(GreedyKind::Revenue, sc, sc.initial_active, stats, none, rng) == sc.initial_active);
  }
  SUBCASE("no history falls back to the current deployment") {
    Rng rng(1);
    HistoryStats empty;
    CHECK(plan_greedy(GreedyKind::Coverage, sc, sc.initial_active, empty, {0.5, 0.5}, rng) == sc.initial_active);
  }
  SUBCASE("same seed, same churn sequence") {
    Rng a(9), b(9);
    std::vector<StationId> x = sc.initial_active, y = sc.initial_active;
    for (int d = 0; d < 10; ++d) {
      x = plan_greedy(GreedyKind::Coverage, sc, x, stats, {0.1, 0.2}, a);
      y = plan_greedy(GreedyKind::Coverage, sc, y, stats, {0.1, 0.2}, b);
      CHECK(x == y);
    }
  }
  SUBCASE("deployment size is preserved and ids stay in the pool") {
    Rng rng(4);
    const auto next = plan_greedy(GreedyKind::Revenue, sc, sc.initial_active, stats, {0.2, 0.3}, rng);
    CHECK(next.size() == sc.initial_active.size());
    for (StationId s : next) CHECK(sc.pool.contains(s));
  }
}

TEST_CASE("churn distribution") {
  Rng rng(5);
  const ChurnDist d;
  double sum = 0;
  int top = 0;
  for (int i = 0; i < 20000; ++i) {
    const int n = d.sample(rng, 200);
    sum += n;
    top = std::max(top, n);
  }
  CHECK(sum / 20000 == doctest::Approx(6.0).epsilon(0.03));
  CHECK(top <= 20);
}

TEST_CASE("coverage score: marginal POI share plus demand share") {
  const Scenario sc = toy::make({.stations = {{1, 1}, {1.2, 1}, {8, 8}}, .pois = {{1, 1.5}, {8, 8.5}}});
  const auto score = coverage_scores(sc.pool, {0}, {2, 2, 4});
  // station 0 alone covers POI 0; 1 adds nothing new; 2 covers POI 1
  CHECK(score[0] == doctest::Approx(0.5 * (0.5 + 0.25)));
  CHECK(score[1] == doctest::Approx(0.5 * (0.0 + 0.25)));
  CHECK(score[2] == doctest::Approx(0.5 * (0.5 + 0.5)));
}

TEST_CASE("one-time greedy: small cases") {
  const std::vector<double> zero(2, 0.0);
  OneTimeOptions cover{1.0, 0.0, 2.0};

  SUBCASE("single affordable candidate") {
    Scenario sc = toy::make({.stations = {{1, 1}, {5, 5}}, .pois = {{1, 1.2}, {5, 5.2}}});
    sc.pool.stations[1].daily_cost = Money::from_units(100);
    CHECK(plan_one_time(sc.pool, zero, Money::from_units(20), cover) == std::vector<StationId>{0});
  }
  SUBCASE("identical candidates, budget for one") {
    const Scenario sc = toy::make({.stations = {{3, 3}, {3, 3}}, .pois = {{3, 3.2}}});
    CHECK(plan_one_time(sc.pool, zero, Money::from_units(10), cover) == std::vector<StationId>{0});
  }
  SUBCASE("budget below the cheapest candidate") {
    const Scenario sc = toy::make({.stations = {{3, 3}, {4, 4}}, .pois = {{3, 3.2}}});
    int warned = 0;
    const auto out = plan_one_time(sc.pool, zero, Money::from_units(5), cover, [&](const std::string&) { ++warned; });
    CHECK(out.empty());
    CHECK(warned == 1);
  }
  SUBCASE("demand capture is capped at 2 per dock") {
    const Scenario sc = toy::make({.stations = {{3, 3}, {6, 6}}, .docks = 2});
    const OneTimeOptions demand{0.0, 1.0, 2.0};
    // station 0 has 100 expected pick-ups but can only absorb 4
    CHECK(one_time_value(sc.pool, {100, 4}, {0}, demand) == doctest::Approx(4.0 / 104));
  }
}

TEST_CASE("one-time greedy with unlimited budget reaches the coverage optimum") {
  Rng rng(31);
  const OneTimeOptions cover{1.0, 0.0, 2.0};
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario sc = random_instance(rng, 4 + trial % 9, 15);
    const std::vector<double> zero(sc.pool.size(), 0.0);
    const Money inf = Money::from_units(1e9);
    const auto pick = plan_one_time(sc.pool, zero, inf, cover);
    CHECK(one_time_value(sc.pool, zero, pick, cover) >=
          (1 - std::exp(-1.0)) * brute_force_coverage(sc.pool, inf, cover) - 1e-12);
    CHECK(one_time_value(sc.pool, zero, pick, cover) == doctest::Approx(brute_force_coverage(sc.pool, inf, cover)));
  }
}

TEST_CASE("one-time greedy under a budget: at least (1 - 1/e) of brute force") {
  Rng rng(77);
  const OneTimeOptions cover{1.0, 0.0, 2.0};
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario sc = random_instance(rng, 6 + trial % 7, 20);
    const std::vector<double> zero(sc.pool.size(), 0.0);
    const Money budget = Money::from_units(uniform(rng, 8, 25));
    const auto pick = plan_one_time(sc.pool, zero, budget, cover);
    Money spent;
    for (StationId s : pick) spent += sc.pool.stations[s].daily_cost;
    CHECK(spent <= budget);
    const double opt = brute_force_coverage(sc.pool, budget, cover);
    CHECK(one_time_value(sc.pool, zero, pick, cover) >= (1 - std::exp(-1.0)) * opt - 1e-12);
  }
}

TEST_CASE("greedy marginal gains are non-increasing for pure coverage") {
  Rng rng(3);
  const OneTimeOptions cover{1.0, 0.0, 2.0};
  for (int trial = 0; trial < 10; ++trial) {
    Scenario sc = random_instance(rng, 12, 30);
    for (auto& s : sc.pool.stations) s.daily_cost = Money::from_units(1);
    const std::vector<double> zero(sc.pool.size(), 0.0);
    // equal costs: budget k buys the first k greedy picks
    double prev_value = 0, prev_gain = 1e9;
    for (int k = 1; k <= 12; ++k) {
      const auto pick = plan_one_time(sc.pool, zero, Money::from_units(k), cover);
      const double v = one_time_value(sc.pool, zero, pick, cover);
      const double gain = v - prev_value;
      CHECK(gain <= prev_gain + 1e-12);
      CHECK(gain >= -1e-12);
      prev_value = v;
      prev_gain = gain;
    }
  }
}

namespace {

/// 4 x 4 grid of stations with cheap docks and one busy hotspot on the left;
/// optionally a second hotspot on the right that appears on `shift_day`.
Scenario hotspot_city(int shift_day) {
  toy::Spec spec;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) spec.stations.push_back({1.0 + 2.5 * i, 1.0 + 2.5 * j});
  spec.daily_cost = 1.0;
  spec.days = 10;
  spec.pois = {{1, 1.3}, {1, 3.8}};
  spec.bumps.push_back({{1.5, 2.5}, 1.5, 400, DemandKind::Background, 0});
  if (shift_day >= 0) spec.bumps.push_back({{8.5, 8.5}, 1.0, 400, DemandKind::Background, shift_day});
  spec.initial = {0, 1, 4, 5};
  return toy::make(spec);
}

}  // namespace

TEST_CASE("incremental optimisation") {
  SUBCASE("day 1 equals the one-time result on the same estimate and budget") {
    const Scenario sc = hotspot_city(-1);
    IncrementalPlanner io;
    const EpisodeResult r = run_closed_loop(sc, io, sc.initial_active, 3);
    const std::vector<DayRecord> day0(r.history.begin(), r.history.begin() + 1);
    const auto oo = plan_one_time(sc.pool, rolling_demand_estimate(sc, day0), day0.back().tallies.gmv);
    CHECK(r.plan.snapshots[0].active == oo);
  }
  SUBCASE("stationary demand: fixed set within 5 days") {
    const Scenario sc = hotspot_city(-1);
    IncrementalPlanner io;
    const EpisodeResult r = run_closed_loop(sc, io, sc.initial_active, 5);
    for (int d = 5; d < sc.episode_days; ++d) {
      const auto diff = snapshot_diff(r.plan.snapshots[4], r.plan.snapshots[d]);
      CHECK(diff.opened.empty());
      CHECK(diff.closed.empty());
    }
  }
  SUBCASE("a new hotspot is picked up within 3 days") {
    const int k = 4;
    const Scenario sc = hotspot_city(k);
    IncrementalPlanner io;
    const EpisodeResult r = run_closed_loop(sc, io, sc.initial_active, 5);
    const Point hot{8.5, 8.5};
    auto near_hot = [&](int day) {
      for (StationId s : r.plan.snapshots[day - 1].active)
        if (distance(sc.pool.stations[s].loc, hot) <= 2.0) return true;
      return false;
    };
    CHECK_FALSE(near_hot(k));
    CHECK((near_hot(k + 1) || near_hot(k + 2) || near_hot(k + 3)));
  }
}

TEST_CASE("every baseline stays inside the pool") {
  const Scenario sc = toy::small_city(12, 40, 10, 4);
  for (const char* name : {"fd", "rev", "cov", "oo", "io"}) {
    auto p = make_baseline(name, sc);
    const EpisodeResult r = run_closed_loop(sc, *p, sc.initial_active, 2);
    CHECK(validate_plan(r.plan, sc.pool, sc.episode_days).empty());
  }
  CHECK_THROWS_AS(make_baseline("hd", sc), ValidationError);
}
