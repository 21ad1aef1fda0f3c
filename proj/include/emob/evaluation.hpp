#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emob/baselines.hpp"
#include "emob/search.hpp"
#include "emob/trainer.hpp"

namespace emob {

/// Runs one planner ("fd", "rev", "cov", "oo", "io" or "mans") on every seed.
/// "mans" needs a model and runs in evaluation mode. Results are in seed order.
std::vector<EpisodeResult> evaluate_planner(const Scenario& scenario, const std::string& planner,
                                            const std::vector<std::uint64_t>& seeds, double w,
                                            const MansModel* model = nullptr, int workers = 1,
                                            const BaselineOptions& baseline = {});

struct Summary {
  double mean = 0;
  double std = 0;  // sample standard deviation; 0 for a single value
};

Summary summarize(const std::vector<double>& xs);

struct ComparisonRow {
  std::string planner;
  int runs = 0;
  Summary sc, nv, gmv, objective;
  double infeasible_day_rate = 0;
  // (x - ref) / ref on the seed means; nullopt when ref is 0
  std::optional<double> delta_sc, delta_nv, delta_gmv, delta_objective;
};

ComparisonRow summarize_runs(const std::string& planner, const std::vector<EpisodeResult>& runs);
void fill_deltas(std::vector<ComparisonRow>& rows, const std::string& reference);

inline constexpr const char* kComparisonHeader =
    "planner,runs,sc_mean,sc_std,nv_mean,nv_std,gmv_mean,gmv_std,objective_mean,objective_std,"
    "infeasible_day_rate,delta_sc,delta_nv,delta_gmv,delta_objective";
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
nlohmann::json comparison_json(const std::vector<ComparisonRow>& rows, const std::string& reference);

struct SweepRow {
  std::string value;
  std::uint64_t seed = 0;
  double sc = 0;
  double nv = 0;
  double gmv = 0;
  double objective = 0;
};

inline constexpr const char* kSweepHeader = "value,seed,sc,nv,gmv,objective";
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// The four action scales offered by the sweep.
std::vector<std::vector<double>> standard_action_scales();
std::string format_scale(const std::vector<double>& scale);
std::vector<double> parse_scale(const std::string& text);

struct SweepOptions {
  TrainConfig train;
  ModelOptions model;
  std::vector<std::uint64_t> seeds;
};

/// Trains one MANS policy per value of w and evaluates its best-batch parameters.
std::vector<SweepRow> sweep_w(const Scenario& scenario, const std::vector<double>& values, const SweepOptions& options,
                              const LogSink& log = {});
/// Same for action scales; w stays at options.train.w.
std::vector<SweepRow> sweep_action_scale(const Scenario& scenario, const std::vector<std::vector<double>>& values,
                                         const SweepOptions& options, const LogSink& log = {});

}  // namespace emob
