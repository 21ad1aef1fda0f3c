#include "emob/search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace emob {

std::vector<ScoredCandidate> score_candidates(const CandidatePool& pool, const std::vector<StationId>& members,
                                              const std::vector<int>& region_pois,
                                              const std::vector<std::uint8_t>& active,
                                              const std::vector<double>& predicted, double alpha) {
  const std::size_t m = members.size();
  std::vector<std::uint8_t> in_region(pool.pois.size(), 0);
  for (int p : region_pois) in_region[p] = 1;

  // active members covering each region POI
  std::vector<int> cover(pool.pois.size(), 0);
  for (StationId s : members)
    if (active[s])
      for (int p : pool.pois_of_station[s])
        if (in_region[p]) ++cover[p];

  std::vector<double> contrib(m, 0.0), demand(m, 0.0);
  double contrib_total = 0, demand_total = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const StationId s = members[j];
    int c = 0;
    for (int p : pool.pois_of_station[s])
      if (in_region[p] && (active[s] ? cover[p] == 1 : cover[p] == 0)) ++c;
    contrib[j] = c;
    contrib_total += c;
    demand[j] = std::max(0.0, predicted[s]);
    demand_total += demand[j];
  }

  std::vector<ScoredCandidate> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double poi = contrib_total > 0 ? contrib[j] / contrib_total : 0.0;
    const double dem = demand_total > 0 ? demand[j] / demand_total : 0.0;
    out[j] = {members[j], alpha * poi + (1 - alpha) * dem};
  }
  std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return out;
}

namespace {

std::vector<StationId> pick(std::vector<StationId> line, int n, double epsilon, Rng& rng) {
  std::vector<StationId> chosen;
  n = std::min<int>(n, static_cast<int>(line.size()));
  for (int k = 0; k < n; ++k) {
    std::size_t at = 0;
    if (uniform01(rng) < epsilon) at = static_cast<std::size_t>(uniform_index(rng, static_cast<int>(line.size())));
    chosen.push_back(line[at]);
    line.erase(line.begin() + static_cast<std::ptrdiff_t>(at));
  }
  return chosen;
}

}  // namespace

LowLevelChoice low_level_select(const std::vector<StationId>& ranking, int n_open, int n_close, double epsilon,
                                Rng& rng, const std::vector<std::uint8_t>& active) {
  std::vector<StationId> off, on;
  for (StationId s : ranking)
    if (!active[s]) off.push_back(s);
  for (auto it = ranking.rbegin(); it != ranking.rend(); ++it)
    if (active[*it]) on.push_back(*it);
  LowLevelChoice c;
  c.open = pick(std::move(off), n_open, epsilon, rng);
  c.close = pick(std::move(on), n_close, epsilon, rng);
  return c;
}

int level_count(const std::vector<double>& action_scale, int level, int region_size, int available) {
  const int n = static_cast<int>(std::lround(action_scale.at(level) * region_size));
  return std::clamp(n, 0, available);
}

// --- observations --------------------------------------------------------------------

ObsNormalizer ObsNormalizer::identity(int dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

ObsNormalizer ObsNormalizer::fit(const std::vector<Eigen::VectorXd>& raw, int region_size) {
  const int dim = observation_size(region_size);
  ObsNormalizer nz = identity(dim);
  if (raw.empty()) return nz;
  // group index per dimension: candidate features pool across slots
  const int cand = region_size * kCandidateFeatures;
  auto group = [&](int d) { return d < cand ? d % kCandidateFeatures : kCandidateFeatures + (d - cand); };
  const int groups = kCandidateFeatures + kContextFeatures + kGlobalFeatures;
  std::vector<double> sum(groups, 0.0), sq(groups, 0.0), cnt(groups, 0.0);
  for (const auto& v : raw) {
    if (v.size() != dim) throw std::invalid_argument("normalizer: observation size mismatch");
    for (int d = 0; d < dim; ++d) {
      const int g = group(d);
      sum[g] += v(d);
      sq[g] += v(d) * v(d);
      cnt[g] += 1;
    }
  }
  for (int d = 0; d < dim; ++d) {
    const int g = group(d);
    const double mu = sum[g] / cnt[g];
    const double var = std::max(0.0, sq[g] / cnt[g] - mu * mu);
    nz.mean[d] = mu;
    nz.std[d] = std::sqrt(var) > 1e-8 ? std::sqrt(var) : 1.0;
  }
  return nz;
}

Eigen::VectorXd ObsNormalizer::apply(const Eigen::VectorXd& raw) const {
  Eigen::VectorXd z(raw.size());
  for (int d = 0; d < raw.size(); ++d) z(d) = (raw(d) - mean[d]) / std[d];
  return z;
}

namespace {

RegionDayMetrics region_metrics(const MansModel& model, int r, const DayRecord& rec, const CandidatePool& pool) {
  return region_day_metrics(model.partition.regions[r].members, model.partition.pois_of[r],
                            to_mask(rec.snapshot.active, pool.size()), rec.tallies, pool);
}

}  // namespace

std::vector<RegionRawView> build_observations(const MansModel& model, const PlanningContext& ctx,
                                              const DemandForecast& forecast) {
  const Scenario& sc = ctx.scenario;
  const CandidatePool& pool = sc.pool;
  const std::size_t n = pool.size();
  const int M = model.partition.region_size;
  const int R = model.partition.count();
  const auto active = to_mask(ctx.current, n);
  const DayTallies* prev = ctx.history.empty() ? nullptr : &ctx.history.back().tallies;

  std::vector<std::array<double, kCandidateFeatures>> feat(n);
  for (std::size_t s = 0; s < n; ++s) {
    const Station& st = pool.stations[s];
    double parked = 0, range = 0;
    if (prev) {
      const StationTally& t = prev->stations[s];
      parked = t.parked_vehicle_steps / kStepsPerDay;
      range = t.parked_vehicle_steps > 0 ? t.parked_range_sum / t.parked_vehicle_steps : 0.0;
    }
    feat[s] = {static_cast<double>(active[s]),
               static_cast<double>(st.docks),
               st.daily_cost.units(),
               parked,
               range,
               forecast.pickups[s],
               forecast.returns[s],
               sc.expected_order_value(static_cast<StationId>(s)),
               st.loc.x,
               st.loc.y};
  }

  std::vector<std::array<double, kCandidateFeatures>> region_mean(R);
  for (int r = 0; r < R; ++r) {
    region_mean[r].fill(0.0);
    for (StationId s : model.partition.regions[r].members)
      for (int k = 0; k < kCandidateFeatures; ++k) region_mean[r][k] += feat[s][k] / M;
  }
  std::array<double, kGlobalFeatures> global{};
  for (int k = 0; k < kCandidateFeatures; ++k) {
    double mean = 0, mx = -1e300;
    for (int r = 0; r < R; ++r) {
      mean += region_mean[r][k] / R;
      mx = std::max(mx, region_mean[r][k]);
    }
    global[k] = mean;
    global[kCandidateFeatures + k] = mx;
  }

  std::vector<RegionRawView> views(R);
  for (int r = 0; r < R; ++r) {
    const Region& reg = model.partition.regions[r];
    const auto scored =
        score_candidates(pool, reg.members, model.partition.pois_of[r], active, forecast.pickups, model.alpha);
    RegionRawView& v = views[r];
    v.raw.resize(observation_size(M));
    int d = 0;
    for (const auto& c : scored) {
      v.ranking.push_back(c.id);
      for (int k = 0; k < kCandidateFeatures; ++k) v.raw(d++) = feat[c.id][k];
    }
    RegionDayMetrics rm;
    if (!ctx.history.empty()) rm = region_metrics(model, r, ctx.history.back(), pool);
    int n_active = 0;
    for (StationId s : reg.members) n_active += active[s];
    v.raw(d++) = rm.sc;
    v.raw(d++) = rm.pm;
    v.raw(d++) = rm.nv.units();
    v.raw(d++) = static_cast<double>(n_active) / M;
    v.raw(d++) = day_type(ctx.day) == DayType::Weekend ? 1.0 : 0.0;
    v.raw(d++) = static_cast<double>(ctx.day) / std::max(1, sc.episode_days);
    for (double g : global) v.raw(d++) = g;
  }
  return views;
}

// --- planner -------------------------------------------------------------------------

MansPlanner::MansPlanner(const MansModel& model, SearchConfig config, Trajectory* record)
    : model_(model), config_(std::move(config)), record_(record) {
  states_.assign(model.partition.count(), model.net.initial_state());
  if (record_) record_->regions.assign(model.partition.count(), {});
}

std::vector<StationId> MansPlanner::plan_day(PlanningContext& ctx) {
  const std::size_t n = ctx.scenario.pool.size();
  const int M = model_.partition.region_size;
  const DemandForecast forecast = model_.predictor.predict(ctx.scenario, ctx.history, ctx.current, ctx.day);
  const auto views = build_observations(model_, ctx, forecast);
  auto active = to_mask(ctx.current, n);
  const auto before = active;

  for (int r = 0; r < model_.partition.count(); ++r) {
    RegionStep step;
    step.obs = model_.normalizer.apply(views[r].raw);
    const HighLevelDecision d =
        high_level_step(model_.net, model_.theta, step.obs, states_[r], ctx.rng, config_.sample);
    int n_on = 0;
    for (StationId s : model_.partition.regions[r].members) n_on += before[s];
    const int n_add = level_count(model_.action_scale, d.add_level, M, M - n_on);
    const int n_remove = level_count(model_.action_scale, d.remove_level, M, n_on);
    const LowLevelChoice choice = low_level_select(views[r].ranking, n_add, n_remove, config_.epsilon, ctx.rng, before);
    for (StationId s : choice.open) active[s] = 1;
    for (StationId s : choice.close) active[s] = 0;
    if (record_) {
      step.add_level = d.add_level;
      step.remove_level = d.remove_level;
      step.log_prob = d.log_prob;
      step.value = d.value;
      record_->regions[r].push_back(std::move(step));
    }
  }
  return from_mask(active);
}

void MansPlanner::after_day(PlanningContext& ctx, const DayRecord& record) {
  if (!record_) return;
  const CandidatePool& pool = ctx.scenario.pool;
  const std::size_t h = ctx.history.size();
  for (int r = 0; r < model_.partition.count(); ++r) {
    const RegionDayMetrics cur = region_metrics(model_, r, record, pool);
    // history already ends with `record`; the day before is the baseline
    const RegionDayMetrics prev = h >= 2 ? region_metrics(model_, r, ctx.history[h - 2], pool) : RegionDayMetrics{};
    record_->regions[r].back().reward = agent_reward(prev, cur, config_.reward);
  }
}

GeneratedPlan generate_plan(const MansModel& model, const Scenario& scenario, std::uint64_t seed,
                            const SearchConfig& config) {
  GeneratedPlan g;
  MansPlanner planner(model, config, &g.trajectory);
  EpisodeOptions opt;
  opt.w = config.reward.w;
  g.episode = run_closed_loop(scenario, planner, scenario.initial_active, seed, opt);
  return g;
}

MansModel build_model(const Scenario& sc, const ModelOptions& options) {
  if (options.action_scale.size() < 2) throw std::invalid_argument("action scale needs at least two levels");
  MansModel m;
  m.partition = partition_regions(sc.pool, sc.region_size, options.seed);
  m.action_scale = options.action_scale;
  m.alpha = options.alpha;
  if (options.predictor == PredictorKind::Gcn && options.predictor_episodes > 0)
    m.predictor = train_demand_predictor(sc, options.predictor_episodes, options.seed);
  else
    m.predictor = DemandPredictor(sc, PredictorKind::MovingAverage);

  PolicyShape shape;
  shape.obs_dim = observation_size(sc.region_size);
  shape.hidden = options.hidden;
  shape.head_hidden = options.hidden;
  shape.levels = static_cast<int>(options.action_scale.size());
  m.net = PolicyNet(shape);
  m.theta = m.net.init(options.seed);

  // Freeze observation statistics from a few episodes of the untrained policy.
  m.normalizer = ObsNormalizer::identity(shape.obs_dim);
  std::vector<Eigen::VectorXd> raw;
  SearchConfig cfg;
  for (int e = 0; e < options.normalizer_episodes; ++e) {
    const GeneratedPlan g = generate_plan(m, sc, derive_seed(options.seed, 0x6e6f726d + e), cfg);
    for (const auto& region : g.trajectory.regions)
      for (const auto& step : region) raw.push_back(step.obs);
  }
  m.normalizer = ObsNormalizer::fit(raw, sc.region_size);
  return m;
}

}  // namespace emob
