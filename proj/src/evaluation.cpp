#include "emob/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace emob {

std::vector<EpisodeResult> evaluate_planner(const Scenario& sc, const std::string& planner,
                                            const std::vector<std::uint64_t>& seeds, double w,
                                            const MansModel* model, int workers, const BaselineOptions& baseline) {
  const int n = static_cast<int>(seeds.size());
  std::vector<EpisodeResult> out(n);
  if (planner == "mans") {
    if (!model) throw ValidationError("planner mans needs a checkpoint");
    const SearchConfig cfg = eval_search_config(w);
    run_jobs(n, effective_workers(workers), [&](int k) { out[k] = generate_plan(*model, sc, seeds[k], cfg).episode; });
    return out;
  }
  BaselineOptions opt = baseline;
  if (planner == "oo" && opt.oo_budget.milli < 0)
    opt.oo_budget = estimate_fixed_daily_gmv(sc, derive_seed(sc.seed, 77));
  make_baseline(planner, sc, opt);  // rejects unknown names before any work
  run_jobs(n, effective_workers(workers), [&](int k) {
    auto p = make_baseline(planner, sc, opt);
    EpisodeOptions eo;
    eo.w = w;
    out[k] = run_closed_loop(sc, *p, sc.initial_active, seeds[k], eo);
  });
  return out;
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return s;
}

ComparisonRow summarize_runs(const std::string& planner, const std::vector<EpisodeResult>& runs) {
  ComparisonRow row;
  row.planner = planner;
  row.runs = static_cast<int>(runs.size());
  std::vector<double> sc, nv, gmv, obj;
  int days = 0, infeasible = 0;
  for (const auto& r : runs) {
    const EpisodeMetrics& e = r.report.episode;
    sc.push_back(e.sc);
    nv.push_back(e.nv.units());
    gmv.push_back(e.gmv.units());
    obj.push_back(e.objective);
    infeasible += e.infeasible_days;
    days += static_cast<int>(r.report.per_day.size());
  }
  row.sc = summarize(sc);
  row.nv = summarize(nv);
  row.gmv = summarize(gmv);
  row.objective = summarize(obj);
  row.infeasible_day_rate = days > 0 ? static_cast<double>(infeasible) / days : 0.0;
  return row;
}

void fill_deltas(std::vector<ComparisonRow>& rows, const std::string& reference) {
  const ComparisonRow* ref = nullptr;
  for (const auto& r : rows)
    if (r.planner == reference) ref = &r;
  if (!ref) return;
  auto delta = [](double x, double base) -> std::optional<double> {
    if (base == 0) return std::nullopt;
    return (x - base) / base;
  };
  const ComparisonRow base = *ref;
  for (auto& r : rows) {
    r.delta_sc = delta(r.sc.mean, base.sc.mean);
    r.delta_nv = delta(r.nv.mean, base.nv.mean);
    r.delta_gmv = delta(r.gmv.mean, base.gmv.mean);
    r.delta_objective = delta(r.objective.mean, base.objective.mean);
  }
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }
nlohmann::json js(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << kComparisonHeader << '\n';
  for (const auto& r : rows)
    out << r.planner << ',' << r.runs << ',' << fmt(r.sc.mean) << ',' << fmt(r.sc.std) << ',' << fmt(r.nv.mean) << ','
        << fmt(r.nv.std) << ',' << fmt(r.gmv.mean) << ',' << fmt(r.gmv.std) << ',' << fmt(r.objective.mean) << ','
        << fmt(r.objective.std) << ',' << fmt(r.infeasible_day_rate) << ',' << fmt(r.delta_sc) << ','
        << fmt(r.delta_nv) << ',' << fmt(r.delta_gmv) << ',' << fmt(r.delta_objective) << '\n';
  return out.str();
}

nlohmann::json comparison_json(const std::vector<ComparisonRow>& rows, const std::string& reference) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows)
    a.push_back({{"planner", r.planner},
                 {"runs", r.runs},
                 {"sc", {{"mean", r.sc.mean}, {"std", r.sc.std}}},
                 {"nv", {{"mean", r.nv.mean}, {"std", r.nv.std}}},
                 {"gmv", {{"mean", r.gmv.mean}, {"std", r.gmv.std}}},
                 {"objective", {{"mean", r.objective.mean}, {"std", r.objective.std}}},
                 {"infeasible_day_rate", r.infeasible_day_rate},
                 {"delta", {{"sc", js(r.delta_sc)}, {"nv", js(r.delta_nv)}, {"gmv", js(r.delta_gmv)},
                            {"objective", js(r.delta_objective)}}}});
  return {{"reference", reference}, {"rows", a}};
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kSweepHeader << '\n';
  for (const auto& r : rows)
    out << r.value << ',' << r.seed << ',' << fmt(r.sc) << ',' << fmt(r.nv) << ',' << fmt(r.gmv) << ','
        << fmt(r.objective) << '\n';
  return out.str();
}

std::vector<std::vector<double>> standard_action_scales() {
  return {{0.0, 0.05, 0.1}, {0.0, 0.1, 0.2}, {0.0, 0.15, 0.3}, {0.0, 0.2, 0.4}};
}

std::string format_scale(const std::vector<double>& scale) {
  std::string s;
  for (std::size_t i = 0; i < scale.size(); ++i) s += (i ? "|" : "") + fmt(scale[i]);
  return s;
}

std::vector<double> parse_scale(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, text.find('|') != std::string::npos ? '|' : ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("bad action scale entry '" + item + "'");
    }
  }
  if (out.size() < 2) throw ValidationError("an action scale needs at least two levels");
  for (double v : out)
    if (v < 0 || v > 1) throw ValidationError("action scale entries must lie in [0, 1]");
  return out;
}

namespace {

std::vector<SweepRow> train_and_evaluate(const Scenario& sc, const std::string& label, const SweepOptions& opt,
                                         const TrainConfig& train_cfg, const ModelOptions& model_opt,
                                         const LogSink& log) {
  TrainResult tr = train(sc, build_model(sc, model_opt), train_cfg, {}, {}, log);
  tr.model.theta = tr.best_theta;  // same policy the "best" checkpoint holds
  const auto runs = evaluate_planner(sc, "mans", opt.seeds, train_cfg.w, &tr.model, train_cfg.workers);
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const EpisodeMetrics& e = runs[k].report.episode;
    rows.push_back({label, opt.seeds[k], e.sc, e.nv.units(), e.gmv.units(), e.objective});
  }
  if (log) log("sweep point " + label + " done");
  return rows;
}

}  // namespace

std::vector<SweepRow> sweep_w(const Scenario& sc, const std::vector<double>& values, const SweepOptions& opt,
                              const LogSink& log) {
  std::vector<SweepRow> rows;
  for (double w : values) {
    TrainConfig cfg = opt.train;
    cfg.w = w;
    const auto part = train_and_evaluate(sc, fmt(w), opt, cfg, opt.model, log);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

std::vector<SweepRow> sweep_action_scale(const Scenario& sc, const std::vector<std::vector<double>>& values,
                                         const SweepOptions& opt, const LogSink& log) {
  std::vector<SweepRow> rows;
  for (const auto& scale : values) {
    ModelOptions mo = opt.model;
    mo.action_scale = scale;
    const auto part = train_and_evaluate(sc, format_scale(scale), opt, opt.train, mo, log);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

}  // namespace emob
