// Acceptance checks 1-11. One PASS/FAIL line per criterion.
//   acceptance            run everything
//   acceptance --only N   run criterion N
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "emob/baselines.hpp"
#include "emob/evaluation.hpp"
#include "emob/report.hpp"
#include "emob/trainer.hpp"
#include "toy.hpp"

using namespace emob;

namespace {

constexpr int kSkip = 77;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool environment_limited = false;  // failed only because the machine cannot run the check
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Scenario& reference() {
  static const Scenario sc = generate_scenario(ScenarioConfig{}, 7);
  return sc;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

int all_workers() { return effective_workers(omp_get_num_procs()); }

/// Random daily churn around the initial deployment.
DeploymentPlan random_plan(const Scenario& sc, Rng& rng, double keep) {
  DeploymentPlan plan;
  plan.initial = DeploymentSnapshot::make(0, sc.initial_active);
  std::vector<std::uint8_t> on = to_mask(sc.initial_active, sc.pool.size());
  for (int d = 1; d <= sc.episode_days; ++d) {
    std::vector<StationId> ids;
    for (std::size_t s = 0; s < on.size(); ++s) {
      if (uniform01(rng) > keep) on[s] = !on[s];
      if (on[s]) ids.push_back(static_cast<StationId>(s));
    }
    plan.snapshots.push_back(DeploymentSnapshot::make(d, ids));
  }
  return plan;
}

// --- 1 ---------------------------------------------------------------------------------------

bool accounting_holds(const EpisodeResult& r, std::string& why) {
  Money gmv, cost;
  const std::size_t first = r.history.size() - r.report.per_day.size();
  for (std::size_t i = 0; i < r.report.per_day.size(); ++i) {
    const DayMetrics& d = r.report.per_day[i];
    const DayTallies& t = r.history[first + i].tallies;
    Money by_station;
    for (const auto& s : t.stations) by_station += s.revenue;
    if (d.nv != d.gmv - d.cost || d.gmv != t.gmv || d.cost != t.cost || by_station != t.gmv) {
      why = fmt("day %d breaks the identity", d.day);
      return false;
    }
    gmv += d.gmv;
    cost += d.cost;
  }
  const EpisodeMetrics& e = r.report.episode;
  if (e.gmv != gmv || e.cost != cost || e.nv != gmv - cost) {
    why = "episode totals differ from the per-day sums";
    return false;
  }
  return true;
}

Outcome criterion1() {
  const Scenario& sc = reference();
  int episodes = 0;
  std::string why;
  for (const char* p : {"fd", "rev", "cov", "oo", "io"})
    for (const auto& r : evaluate_planner(sc, p, kSeeds, 1.0, nullptr, all_workers())) {
      ++episodes;
      if (!accounting_holds(r, why)) return {false, std::string(p) + ": " + why};
    }
  ModelOptions mo;
  mo.predictor = PredictorKind::MovingAverage;
  mo.normalizer_episodes = 1;
  const MansModel model = build_model(sc, mo);
  for (std::uint64_t s : kSeeds) {
    ++episodes;
    if (!accounting_holds(generate_plan(model, sc, s, SearchConfig{}).episode, why)) return {false, "mans: " + why};
  }
  Rng rng(11);
  for (int k = 0; k < 10; ++k) {
    ++episodes;
    if (!accounting_holds(run_episode(sc, random_plan(sc, rng, 0.8), 100 + k), why)) return {false, "random: " + why};
  }
  return {true, fmt("%d episodes, NV = GMV - cost exactly on every day and in total", episodes)};
}

// --- 2 ---------------------------------------------------------------------------------------

Outcome criterion2() {
  const Scenario& sc = reference();
  const double full = sc.constants.full_range_km;
  long checks = 0;
  int bad_episode = -1;
  std::string why;
  for (int k = 0; k < 100 && bad_episode < 0; ++k) {
    Rng rng(derive_seed(2024, k));
    const DeploymentPlan plan = random_plan(sc, rng, uniform(rng, 0.6, 0.98));
    EpisodeOptions opt;
    opt.observer = [&](const SimState& st) {
      ++checks;
      if (!why.empty()) return;
      int live = 0;
      for (const Vehicle& v : st.vehicles) {
        if (v.status == VehicleStatus::Retired) continue;
        ++live;
        if (!(v.range_km >= 0 && v.range_km <= full)) why = fmt("vehicle %d range %.6f", v.id, v.range_km);
      }
      const int counted = st.count(VehicleStatus::Parked) + st.count(VehicleStatus::Charging) +
                          st.count(VehicleStatus::InTransit) + st.count(VehicleStatus::Queued);
      if (counted != st.fleet_size() || live != st.fleet_size())
        why = fmt("fleet %d, by status %d, live %d", st.fleet_size(), counted, live);
      for (std::size_t s = 0; s < st.docked.size(); ++s) {
        if (static_cast<int>(st.docked[s].size()) > sc.pool.stations[s].docks)
          why = fmt("station %zu holds %zu of %d docks", s, st.docked[s].size(), sc.pool.stations[s].docks);
        if (!st.active[s] && !st.docked[s].empty()) why = fmt("inactive station %zu holds vehicles", s);
        for (int vid : st.docked[s])
          if (st.vehicles[vid].station != static_cast<StationId>(s)) why = fmt("vehicle %d docked twice", vid);
      }
    };
    run_episode(sc, plan, derive_seed(99, k), opt);
    if (!why.empty()) bad_episode = k;
  }
  if (bad_episode >= 0) return {false, fmt("episode %d: %s", bad_episode, why.c_str())};
  return {true, fmt("100 random episodes, %ld step checks, no violation", checks)};
}

// --- 3 ---------------------------------------------------------------------------------------

Outcome criterion3() {
  const Scenario& sc = reference();
  Rng rng(5);
  const DeploymentPlan plan = random_plan(sc, rng, 0.9);
  for (std::uint64_t seed : kSeeds) {
    const std::string a = report_json(run_episode(sc, plan, seed).report).dump();
    const std::string b = report_json(run_episode(sc, plan, seed).report).dump();
    if (a != b) return {false, fmt("seed %llu: reports differ", static_cast<unsigned long long>(seed))};
  }
  ModelOptions mo;
  mo.predictor_episodes = 2;
  mo.normalizer_episodes = 1;
  const MansModel model = build_model(sc, mo);
  TrainConfig cfg;
  cfg.plan_budget = 32;
  auto curve_of = [&](int workers) {
    TrainConfig c = cfg;
    c.workers = workers;
    std::string csv;
    const TrainResult r = train(sc, model, c, {}, [&](const CurveRow& row) { csv += curve_csv_row(row) + "\n"; });
    return std::make_pair(csv, r.model.theta);
  };
  const auto one = curve_of(1), four = curve_of(4);
  if (one.first != four.first) return {false, "learning curves differ between W=1 and W=4"};
  if (one.second != four.second) return {false, "final parameters differ between W=1 and W=4"};
  return {true, "5 reports bit-identical on rerun; 4-update learning curve and weights identical for W=1 and W=4"};
}

// --- 4 ---------------------------------------------------------------------------------------

Outcome criterion4() {
  Rng rng(404);
  int agree = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const int m = 2 + uniform_index(rng, 9);  // 2..10
    toy::Spec spec;
    spec.city_km = 4;
    for (int i = 0; i < m; ++i) spec.stations.push_back({uniform(rng, 0.3, 3.7), uniform(rng, 0.3, 3.7)});
    const int pois = uniform_index(rng, 3 * m + 1);
    for (int p = 0; p < pois; ++p) spec.pois.push_back({uniform(rng, 0, 4), uniform(rng, 0, 4)});
    spec.region_size = m;
    const Scenario sc = toy::make(spec);
    std::vector<StationId> members(m);
    std::vector<int> region_pois(pois);
    for (int i = 0; i < m; ++i) members[i] = i;
    for (int p = 0; p < pois; ++p) region_pois[p] = p;
    std::vector<std::uint8_t> active(m);
    for (auto& a : active) a = uniform01(rng) < 0.5;
    std::vector<double> demand(m);
    for (double& d : demand) d = uniform01(rng) < 0.2 ? 0.0 : std::floor(uniform(rng, 0, 30));

    const auto scored = score_candidates(sc.pool, members, region_pois, active, demand);
    std::vector<double> score(m);
    std::vector<StationId> ranking;
    for (const auto& c : scored) {
      score[c.id] = c.score;
      ranking.push_back(c.id);
    }
    const int off = static_cast<int>(std::count(active.begin(), active.end(), 0));
    const int n_open = uniform_index(rng, off + 1), n_close = uniform_index(rng, m - off + 1);
    const LowLevelChoice choice = low_level_select(ranking, n_open, n_close, 0.0, rng, active);

    double best_open = -1, worst_close = 1e18;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      int k = 0, k_on = 0, k_off = 0;
      double sum = 0;
      for (int i = 0; i < m; ++i)
        if (mask >> i & 1u) {
          ++k;
          sum += score[i];
          active[i] ? ++k_on : ++k_off;
        }
      if (k_off == k && k == n_open) best_open = std::max(best_open, sum);
      if (k_on == k && k == n_close) worst_close = std::min(worst_close, sum);
    }
    double got_open = 0, got_close = 0;
    bool valid = static_cast<int>(choice.open.size()) == n_open && static_cast<int>(choice.close.size()) == n_close;
    for (StationId s : choice.open) {
      got_open += score[s];
      valid &= !active[s];
    }
    for (StationId s : choice.close) {
      got_close += score[s];
      valid &= static_cast<bool>(active[s]);
    }
    if (valid && std::abs(got_open - best_open) <= 1e-12 && std::abs(got_close - worst_close) <= 1e-12) ++agree;
  }
  return {agree == 200, fmt("%d/200 instances match the exhaustive optimum", agree)};
}

// --- 5 ---------------------------------------------------------------------------------------

Outcome criterion5() {
  Rng rng(505);
  const OneTimeOptions cover{1.0, 0.0, 2.0};
  double worst = 1e9, mean = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 6 + uniform_index(rng, 7);  // 6..12
    toy::Spec spec;
    spec.city_km = 5;
    for (int i = 0; i < n; ++i) spec.stations.push_back({uniform(rng, 0.5, 4.5), uniform(rng, 0.5, 4.5)});
    for (int p = 0; p < 25; ++p) spec.pois.push_back({uniform(rng, 0, 5), uniform(rng, 0, 5)});
    Scenario sc = toy::make(spec);
    for (auto& s : sc.pool.stations) s.daily_cost = Money::from_units(std::round(uniform(rng, 1, 10)));
    const Money budget = Money::from_units(std::round(uniform(rng, 8, 25)));
    const std::vector<double> zero(n, 0.0);
    const double greedy = one_time_value(sc.pool, zero, plan_one_time(sc.pool, zero, budget, cover), cover);
    double best = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      Money cost;
      std::vector<StationId> ids;
      for (int s = 0; s < n; ++s)
        if (mask >> s & 1u) {
          ids.push_back(s);
          cost += sc.pool.stations[s].daily_cost;
        }
      if (cost <= budget) best = std::max(best, one_time_value(sc.pool, zero, ids, cover));
    }
    const double ratio = best > 0 ? greedy / best : 1.0;
    worst = std::min(worst, ratio);
    mean += ratio / 20;
  }
  return {worst >= 1 - std::exp(-1.0), fmt("worst greedy/optimum %.4f, mean %.4f (bound 0.6321)", worst, mean)};
}

// --- 6 ---------------------------------------------------------------------------------------

Outcome criterion6() {
  const PolicyNet net(PolicyShape{observation_size(2), 16, 16, 3});
  const PpoConfig cfg;
  Rng rng(606);
  double worst = 0;
  int draws = 0, attempts = 0;
  while (draws < 50 && attempts < 500) {
    ++attempts;
    auto theta = net.init(derive_seed(606, attempts));
    for (double& t : theta) t += 0.1 * normal(rng);
    PpoSequence s;
    Eigen::VectorXd x(net.shape().obs_dim);
    for (int i = 0; i < x.size(); ++i) x(i) = normal(rng);
    LstmState st = net.initial_state();
    const HighLevelDecision d = high_level_step(net, theta, x, st, rng, true);
    s.obs = {x};
    s.add = {d.add_level};
    s.remove = {d.remove_level};
    s.log_prob_old = {d.log_prob + uniform(rng, -0.4, 0.4)};
    s.advantage = {normal(rng)};
    s.ret = {normal(rng)};
    const std::vector<PpoSequence> batch{s};
    // the surrogate has kinks at rho = 1 +- clip
    if (std::abs(max_ratio_deviation(net, theta, batch) - cfg.clip) < 1e-3) continue;
    std::vector<double> grad(net.size(), 0.0);
    ppo_loss(net, theta, batch, {0}, cfg, &grad);
    double err = 0, norm = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto tp = theta, tm = theta;
      tp[i] += 1e-5;
      tm[i] -= 1e-5;
      const double fd =
          (ppo_loss(net, tp, batch, {0}, cfg, nullptr) - ppo_loss(net, tm, batch, {0}, cfg, nullptr)) / 2e-5;
      err += (fd - grad[i]) * (fd - grad[i]);
      norm += fd * fd;
    }
    worst = std::max(worst, std::sqrt(err) / std::max(std::sqrt(norm), 1e-300));
    ++draws;
  }
  return {draws == 50 && worst <= 1e-4, fmt("%d draws, worst relative error %.2e (tolerance 1e-4)", draws, worst)};
}

// --- 7 ---------------------------------------------------------------------------------------

double level_probability(const MansModel& m, const Scenario& sc, int add, int remove) {
  const GeneratedPlan g = generate_plan(m, sc, 31, eval_search_config(1.0));
  double p = 0;
  int n = 0;
  for (const auto& region : g.trajectory.regions) {
    LstmState st = m.net.initial_state();
    Rng rng(0);
    for (const auto& step : region) {
      const HighLevelDecision d = high_level_step(m.net, m.theta, step.obs, st, rng, false);
      p += d.add_probs(add) * d.remove_probs(remove);
      ++n;
    }
  }
  return p / n;
}

Outcome criterion7() {
  const Scenario sc = toy::small_city(17, 40, 10, 4);
  constexpr int kAdd = 1, kRemove = 0;
  int ok = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ModelOptions mo;
    mo.seed = seed;
    mo.predictor = PredictorKind::MovingAverage;
    mo.normalizer_episodes = 2;
    const MansModel model = build_model(sc, mo);
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.plan_budget = 500 * cfg.rollouts_per_update;
    cfg.synthetic_reward = [](int a, int r) { return a == kAdd && r == kRemove ? 1.0 : 0.0; };
    cfg.stop_when = [&](const MansModel& m, int updates) {
      return updates % 10 == 0 && level_probability(m, sc, kAdd, kRemove) >= 0.9;
    };
    const TrainResult res = train(sc, model, cfg);
    const double p = level_probability(res.model, sc, kAdd, kRemove);
    if (p >= 0.9) ++ok;
    detail += fmt("%sseed %llu p=%.3f after %d updates", seed > 1 ? "; " : "", static_cast<unsigned long long>(seed),
                  p, res.updates);
  }
  return {ok == 5, fmt("%d/5 seeds; ", ok) + detail};
}

// --- 8 ---------------------------------------------------------------------------------------

Outcome criterion8() {
  const Scenario& sc = reference();
  TrainConfig cfg;  // w = 1, 2000 plans
  cfg.workers = all_workers();
  ModelOptions mo;
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult tr = train(sc, build_model(sc, mo), cfg);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
  MansModel best = tr.model;
  best.theta = tr.best_theta;

  std::map<std::string, std::vector<double>> obj;
  for (const char* p : {"fd", "rev", "cov", "oo", "io"})
    for (const auto& r : evaluate_planner(sc, p, kSeeds, 1.0, nullptr, cfg.workers))
      obj[p].push_back(r.report.episode.objective);
  for (const auto& r : evaluate_planner(sc, "mans", kSeeds, 1.0, &best, cfg.workers))
    obj["mans"].push_back(r.report.episode.objective);
  auto mean = [&](const std::string& p) { return summarize(obj[p]).mean; };

  const bool order = mean("mans") > mean("io") && mean("io") >= mean("oo") &&
                     mean("oo") > std::max(mean("rev"), mean("cov")) && std::max(mean("rev"), mean("cov")) > mean("fd");
  int wins = 0;
  for (std::size_t k = 0; k < kSeeds.size(); ++k)
    wins += obj["mans"][k] > obj["fd"][k] && obj["mans"][k] > obj["oo"][k] && obj["mans"][k] > obj["io"][k];
  return {order && wins >= 4,
          fmt("means MANS %.4f IO %.4f OO %.4f REV %.4f COV %.4f FD %.4f; MANS beats FD, OO and IO on %d/5 seeds; "
              "trained %.1f min",
              mean("mans"), mean("io"), mean("oo"), mean("rev"), mean("cov"), mean("fd"), wins, minutes)};
}

// --- 9 ---------------------------------------------------------------------------------------

Outcome criterion9() {
  const Scenario& sc = reference();
  SweepOptions so;
  so.train.plan_budget = 2000;
  so.train.workers = all_workers();
  so.seeds = kSeeds;
  const std::vector<double> ws{9.0, 1.0, 1.0 / 9};
  const auto rows = sweep_w(sc, ws, so);
  std::vector<double> nv(ws.size(), 0.0), scv(ws.size(), 0.0);
  for (std::size_t i = 0; i < ws.size(); ++i)
    for (std::size_t k = 0; k < kSeeds.size(); ++k) {
      nv[i] += rows[i * kSeeds.size() + k].nv / kSeeds.size();
      scv[i] += rows[i * kSeeds.size() + k].sc / kSeeds.size();
    }
  int inversions = 0;
  double worst = 0;
  for (std::size_t i = 1; i < ws.size(); ++i) {
    if (nv[i] > nv[i - 1]) {
      ++inversions;
      worst = std::max(worst, (nv[i] - nv[i - 1]) / std::abs(nv[i - 1]));
    }
    if (scv[i] < scv[i - 1]) {
      ++inversions;
      worst = std::max(worst, (scv[i - 1] - scv[i]) / std::abs(scv[i - 1]));
    }
  }
  return {inversions == 0 || (inversions == 1 && worst <= 0.01),
          fmt("w 9 -> 1 -> 1/9: NV %.0f, %.0f, %.0f; SC %.4f, %.4f, %.4f; %d inversion(s), largest %.2f%%", nv[0],
              nv[1], nv[2], scv[0], scv[1], scv[2], inversions, 100 * worst)};
}

// --- 10 --------------------------------------------------------------------------------------

constexpr StationId kLure = 19;

/// Two clusters of ten. A earns; B has no demand, and its centre holds a
/// very expensive station that alone covers a block of POIs.
Scenario lure_city() {
  toy::Spec spec;
  spec.city_km = 20;
  for (int i = 0; i < 10; ++i) spec.stations.push_back({2.0 + 0.7 * (i % 4), 2.0 + 0.7 * (i / 4)});
  for (int i = 0; i < 9; ++i) spec.stations.push_back({14.5 + 1.2 * (i % 3), 14.5 + 1.2 * (i / 3)});
  spec.stations.push_back({15.7, 17.3});
  for (int i = 0; i < 30; ++i) spec.pois.push_back({15.7 + 0.05 * (i % 6), 17.3 + 0.05 * (i / 6)});
  for (int i = 0; i < 10; ++i) spec.pois.push_back({2.0 + 0.7 * (i % 4), 2.3 + 0.7 * (i / 4)});
  spec.bumps = {{{3, 3}, 1.2, 600, DemandKind::Background, 0}};
  spec.days = 7;
  spec.region_size = 10;
  spec.daily_cost = 2;
  spec.initial = {0, 1, 2, 3, 4, 10, 11};
  Scenario sc = toy::make(spec);
  sc.pool.price.values = {3, 3, 3, 3};
  sc.pool.stations[kLure].daily_cost = Money::from_units(30000);
  return sc;
}

Outcome criterion10() {
  const Scenario sc = lure_city();
  const double w = 1.0 / 9;
  ModelOptions mo;
  mo.hidden = 32;
  mo.predictor_episodes = 4;
  mo.normalizer_episodes = 2;
  const MansModel model = build_model(sc, mo);
  TrainConfig cfg;
  cfg.w = w;
  cfg.plan_budget = 800;

  auto infeasible_rate = [&](const MansModel& m, int& lure_days) {
    int bad = 0, days = 0;
    lure_days = 0;
    for (const auto& r : evaluate_planner(sc, "mans", kSeeds, w, &m)) {
      bad += r.report.episode.infeasible_days;
      days += static_cast<int>(r.report.per_day.size());
      for (const auto& snap : r.plan.snapshots)
        lure_days += std::binary_search(snap.active.begin(), snap.active.end(), kLure);
    }
    return static_cast<double>(bad) / days;
  };

  cfg.lambda = 0;
  int lure0 = 0, lure_grid = 0;
  const double rate0 = infeasible_rate(train(sc, model, cfg).model, lure0);

  const double scale = lambda_scale(sc, model.partition, 5);
  const LambdaSearch gs = grid_search_lambda(sc, model, cfg, {0.5 * scale, scale, 2 * scale}, {101, 102, 103});
  cfg.lambda = gs.best;
  const double rate_grid = infeasible_rate(train(sc, model, cfg).model, lure_grid);
  return {rate_grid < 0.05 && rate0 > 0.20,
          fmt("w = 1/9; lambda=0: %.1f%% infeasible days (lure open %d/35); grid lambda %.3g: %.1f%% (lure open %d/35)",
              100 * rate0, lure0, gs.best, 100 * rate_grid, lure_grid)};
}

// --- 11 --------------------------------------------------------------------------------------

Outcome criterion11() {
  const Scenario& sc = reference();
  const DeploymentPlan plan = plan_fixed(sc.initial_active, sc.episode_days);
  std::vector<double> objective(100);
  auto timed = [&](int workers) {
    const auto t0 = std::chrono::steady_clock::now();
    run_jobs(100, workers, [&](int j) { objective[j] = run_episode(sc, plan, derive_seed(1111, j)).report.episode.objective; });
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  timed(1);  // warm caches
  const double t1 = timed(1), t4 = timed(4);
  const int cores = omp_get_num_procs();
  const bool pass = t4 <= 0.5 * t1;
  Outcome o{pass, fmt("W=1 %.2fs, W=4 %.2fs, ratio %.2f (needs <= 0.50); %d core(s) available", t1, t4, t4 / t1,
                      cores)};
  o.environment_limited = !pass && cores < 4;
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "accounting identity", criterion1},
      {2, "conservation suite", criterion2},
      {3, "determinism", criterion3},
      {4, "epsilon-greedy oracle", criterion4},
      {5, "one-time greedy quality", criterion5},
      {6, "PPO gradient check", criterion6},
      {7, "bandit convergence", criterion7},
      {8, "directional planner ordering", criterion8},
      {9, "weight-sweep trend", criterion9},
      {10, "self-sustaining penalty", criterion10},
      {11, "multi-simulation speedup", criterion11},
  };
  int failed = 0, limited = 0;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d: %s  %s: %s%s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(),
                o.environment_limited ? " [needs more cores than this machine has]" : "");
    std::fflush(stdout);
    if (!o.pass) (o.environment_limited ? limited : failed)++;
  }
  if (failed) return 1;
  return limited ? kSkip : 0;
}
