#include "emob/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emob/baselines.hpp"
#include "emob/nn.hpp"

namespace emob {

DemandGraph DemandGraph::build(const CandidatePool& pool, double radius_km, int knn) {
  const int n = static_cast<int>(pool.size());
  std::vector<std::vector<int>> nbr(n);
  for (int s = 0; s < n; ++s)
    for (StationId t : pool.by_distance[s]) {
      if (pool.dist(s, t) > radius_km) break;
      nbr[s].push_back(t);
    }
  for (int s = 0; s < n; ++s) {
    if (!nbr[s].empty()) continue;
    for (int j = 0; j < knn && j < static_cast<int>(pool.by_distance[s].size()); ++j) {
      const int t = pool.by_distance[s][j];
      nbr[s].push_back(t);
      nbr[t].push_back(s);  // keep the graph symmetric
    }
  }
  DemandGraph g;
  g.degree.resize(n);
  for (int s = 0; s < n; ++s) {
    std::sort(nbr[s].begin(), nbr[s].end());
    nbr[s].erase(std::unique(nbr[s].begin(), nbr[s].end()), nbr[s].end());
    g.degree[s] = static_cast<int>(nbr[s].size());
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int s = 0; s < n; ++s) {
    const double ds = g.degree[s] + 1.0;
    trip.emplace_back(s, s, 1.0 / ds);
    for (int t : nbr[s]) trip.emplace_back(s, t, 1.0 / std::sqrt(ds * (g.degree[t] + 1.0)));
  }
  g.norm_adj.resize(n, n);
  g.norm_adj.setFromTriplets(trip.begin(), trip.end());
  return g;
}

DemandWindow DemandWindow::from_history(const std::vector<DayRecord>& history, const std::vector<StationId>& active,
                                        int target_day, std::size_t n) {
  DemandWindow w;
  const int have = std::min<int>(3, static_cast<int>(history.size()));
  for (int k = 0; k < have; ++k) {
    const DayRecord& rec = history[history.size() - 1 - k];
    std::vector<double> p(n), r(n);
    for (std::size_t s = 0; s < n; ++s) {
      p[s] = rec.tallies.stations[s].pickups_intent;
      r[s] = rec.tallies.stations[s].returns_intent;
    }
    w.pickups.push_back(std::move(p));
    w.returns.push_back(std::move(r));
  }
  w.active = to_mask(active, n);
  w.next_weekend = day_type(target_day) == DayType::Weekend;
  return w;
}

DemandForecast moving_average_forecast(const DemandWindow& w) {
  DemandForecast f;
  const std::size_t n = w.active.size();
  f.pickups.assign(n, 0.0);
  f.returns.assign(n, 0.0);
  if (w.pickups.empty()) return f;
  for (std::size_t k = 0; k < w.pickups.size(); ++k)
    for (std::size_t s = 0; s < n; ++s) {
      f.pickups[s] += w.pickups[k][s] / static_cast<double>(w.pickups.size());
      f.returns[s] += w.returns[k][s] / static_cast<double>(w.returns.size());
    }
  return f;
}

DemandForecast prior_forecast(const Scenario& sc, int day) {
  const std::size_t n = sc.pool.size();
  DemandForecast f;
  f.pickups.resize(n);
  f.returns.assign(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) f.pickups[s] = sc.expected_daily_pickups(static_cast<StationId>(s), day);
  std::vector<double> scratch;
  for (int step = 0; step < kStepsPerDay; ++step) {
    const auto rates = sc.step_rates(day, step, scratch);
    for (std::size_t o = 0; o < n; ++o) {
      if (rates[o] <= 0) continue;
      const auto row = sc.od_row(static_cast<StationId>(o), step);
      for (std::size_t d = 0; d < n; ++d) f.returns[d] += rates[o] * row[d];
    }
  }
  return f;
}

// --- GCN ------------------------------------------------------------------------

namespace {
// each layer sees [own, neighbourhood] side by side
constexpr int kW1 = 2 * GcnRegressor::kFeatures * GcnRegressor::kHidden;
constexpr int kW2 = 2 * GcnRegressor::kHidden * GcnRegressor::kOutputs;

Eigen::MatrixXd with_neighbours(const Eigen::SparseMatrix<double>& a, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), 2 * x.cols());
  out << x, a * x;
  return out;
}
}  // namespace

GcnRegressor::GcnRegressor(DemandGraph graph, std::vector<int> docks) : graph_(std::move(graph)), docks_(std::move(docks)) {
  double sum = 0;
  for (int d : docks_) sum += d;
  mean_docks_ = docks_.empty() ? 1.0 : std::max(1.0, sum / docks_.size());
  params.assign(kW1 + kW2, 0.0);
}

void GcnRegressor::init(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x6763));
  params.resize(kW1 + kW2);
  const double a1 = std::sqrt(6.0 / (2 * kFeatures + kHidden));
  const double a2 = std::sqrt(6.0 / (2 * kHidden + kOutputs));
  for (int i = 0; i < kW1; ++i) params[i] = uniform(rng, -a1, a1);
  for (int i = 0; i < kW2; ++i) params[kW1 + i] = uniform(rng, -a2, a2);
}

Eigen::MatrixXd GcnRegressor::features(const DemandWindow& w) const {
  const int n = graph_.size();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, kFeatures);
  if (w.pickups.empty()) return x;
  const int have = static_cast<int>(w.pickups.size());
  for (int s = 0; s < n; ++s) {
    double mp = 0, mr = 0;
    for (int k = 0; k < have; ++k) {
      mp += w.pickups[k][s] / have;
      mr += w.returns[k][s] / have;
    }
    // missing older days repeat the mean of the ones we have
    for (int k = 0; k < 3; ++k) {
      x(s, k) = (k < have ? w.pickups[k][s] : mp) / count_scale;
      x(s, 3 + k) = (k < have ? w.returns[k][s] : mr) / count_scale;
    }
    const double m = (mp + mr) / (2.0 * count_scale);
    x(s, 6) = w.next_weekend ? m : 0.0;
    x(s, 7) = w.active[s] ? m : 0.0;
    x(s, 8) = m * docks_[s] / mean_docks_;
  }
  return x;
}

DemandForecast GcnRegressor::predict(const DemandWindow& w) const {
  const int n = graph_.size();
  Eigen::Map<const Eigen::MatrixXd> W1(params.data(), 2 * kFeatures, kHidden);
  Eigen::Map<const Eigen::MatrixXd> W2(params.data() + kW1, 2 * kHidden, kOutputs);
  const Eigen::MatrixXd ax = with_neighbours(graph_.norm_adj, features(w));
  const Eigen::MatrixXd h = (ax * W1).cwiseMax(0.0);
  const Eigen::MatrixXd y = with_neighbours(graph_.norm_adj, h) * W2;
  DemandForecast f;
  f.pickups.resize(n);
  f.returns.resize(n);
  for (int s = 0; s < n; ++s) {
    f.pickups[s] = std::max(0.0, y(s, 0)) * count_scale;
    f.returns[s] = std::max(0.0, y(s, 1)) * count_scale;
  }
  return f;
}

double GcnRegressor::loss_and_grad(const std::vector<DemandWindow>& inputs, const std::vector<DemandForecast>& targets,
                                   std::vector<double>* grad) const {
  const int n = graph_.size();
  Eigen::Map<const Eigen::MatrixXd> W1(params.data(), 2 * kFeatures, kHidden);
  Eigen::Map<const Eigen::MatrixXd> W2(params.data() + kW1, 2 * kHidden, kOutputs);
  Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(2 * kFeatures, kHidden);
  Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(2 * kHidden, kOutputs);
  const double denom = static_cast<double>(inputs.size()) * n * kOutputs;
  double loss = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Eigen::MatrixXd ax = with_neighbours(graph_.norm_adj, features(inputs[i]));
    const Eigen::MatrixXd z1 = ax * W1;
    const Eigen::MatrixXd h = z1.cwiseMax(0.0);
    const Eigen::MatrixXd ah = with_neighbours(graph_.norm_adj, h);
    Eigen::MatrixXd e = ah * W2;
    for (int s = 0; s < n; ++s) {
      e(s, 0) -= targets[i].pickups[s] / count_scale;
      e(s, 1) -= targets[i].returns[s] / count_scale;
    }
    loss += e.squaredNorm() / denom;
    if (!grad) continue;
    const Eigen::MatrixXd dy = 2.0 * e / denom;
    g2 += ah.transpose() * dy;
    const Eigen::MatrixXd dah = dy * W2.transpose();
    // adjacency is symmetric
    Eigen::MatrixXd dz1 = dah.leftCols(kHidden) + graph_.norm_adj * dah.rightCols(kHidden);
    for (int s = 0; s < n; ++s)
      for (int k = 0; k < kHidden; ++k)
        if (z1(s, k) <= 0) dz1(s, k) = 0;
    g1 += ax.transpose() * dz1;
  }
  if (grad) {
    grad->assign(params.size(), 0.0);
    std::copy(g1.data(), g1.data() + kW1, grad->begin());
    std::copy(g2.data(), g2.data() + kW2, grad->begin() + kW1);
  }
  return loss;
}

double GcnRegressor::fit(const std::vector<DemandWindow>& inputs, const std::vector<DemandForecast>& targets,
                         const GcnTrainOptions& options) {
  if (inputs.size() != targets.size()) throw std::invalid_argument("gcn fit: inputs and targets differ in size");
  if (inputs.empty()) return 0.0;
  double sum = 0, cnt = 0;
  for (const auto& t : targets)
    for (std::size_t s = 0; s < t.pickups.size(); ++s) {
      sum += t.pickups[s] + t.returns[s];
      cnt += 2;
    }
  count_scale = sum > 0 ? sum / cnt : 1.0;
  init(options.seed);
  Adam adam(params.size(), options.lr);
  std::vector<double> grad;
  for (int e = 0; e < options.epochs; ++e) {
    loss_and_grad(inputs, targets, &grad);
    adam.step(params, grad);
  }
  trained = true;
  return loss_and_grad(inputs, targets, nullptr);
}

// --- predictor ------------------------------------------------------------------------

DemandPredictor::DemandPredictor(const Scenario& sc, PredictorKind k) : kind(k) {
  std::vector<int> docks;
  for (const auto& s : sc.pool.stations) docks.push_back(s.docks);
  gcn = GcnRegressor(DemandGraph::build(sc.pool), std::move(docks));
}

DemandForecast DemandPredictor::predict(const Scenario& sc, const std::vector<DayRecord>& history,
                                        const std::vector<StationId>& active, int target_day) const {
  if (history.empty()) return prior_forecast(sc, target_day);
  const DemandWindow w = DemandWindow::from_history(history, active, target_day, sc.pool.size());
  if (kind == PredictorKind::Gcn && gcn.trained) return gcn.predict(w);
  return moving_average_forecast(w);
}

nlohmann::json DemandPredictor::to_json() const {
  return {{"kind", kind == PredictorKind::Gcn ? "gcn" : "moving_average"},
          {"trained", gcn.trained},
          {"count_scale", gcn.count_scale},
          {"params", gcn.params}};
}

void DemandPredictor::load_json(const Scenario& sc, const nlohmann::json& j) {
  *this = DemandPredictor(sc, j.at("kind").get<std::string>() == "gcn" ? PredictorKind::Gcn
                                                                       : PredictorKind::MovingAverage);
  gcn.trained = j.at("trained").get<bool>();
  gcn.count_scale = j.at("count_scale").get<double>();
  gcn.params = j.at("params").get<std::vector<double>>();
}

void append_training_pairs(const std::vector<DayRecord>& history, std::size_t n, std::vector<DemandWindow>& inputs,
                           std::vector<DemandForecast>& targets) {
  for (std::size_t t = 1; t < history.size(); ++t) {
    const std::vector<DayRecord> past(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(t));
    inputs.push_back(DemandWindow::from_history(past, past.back().snapshot.active, history[t].tallies.day, n));
    DemandForecast f;
    for (std::size_t s = 0; s < n; ++s) {
      f.pickups.push_back(history[t].tallies.stations[s].pickups_intent);
      f.returns.push_back(history[t].tallies.stations[s].returns_intent);
    }
    targets.push_back(std::move(f));
  }
}

DemandPredictor train_demand_predictor(const Scenario& sc, int episodes, std::uint64_t seed,
                                       const GcnTrainOptions& options) {
  static const char* kPlanners[] = {"fd", "rev", "cov", "io"};
  std::vector<DemandWindow> inputs;
  std::vector<DemandForecast> targets;
  for (int e = 0; e < episodes; ++e) {
    auto planner = make_baseline(kPlanners[e % 4], sc);
    const EpisodeResult r = run_closed_loop(sc, *planner, sc.initial_active, derive_seed(seed, 1000 + e));
    append_training_pairs(r.history, sc.pool.size(), inputs, targets);
  }
  DemandPredictor p(sc, PredictorKind::Gcn);
  GcnTrainOptions opt = options;
  opt.seed = derive_seed(seed, 0x67636e);
  p.gcn.fit(inputs, targets, opt);
  return p;
}

}  // namespace emob
