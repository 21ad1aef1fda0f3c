#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "emob/ppo.hpp"
#include "emob/search.hpp"

namespace emob {

struct TrainConfig {
  PpoConfig ppo;
  int rollouts_per_update = 8;  // K
  int plan_budget = 2000;
  int workers = 1;
  std::uint64_t seed = 1;
  double w = 1.0;
  double lambda = 0.0;
  double epsilon = 0.1;
  int checkpoint_every = 25;  // updates; 0 keeps only initial, best and final
  /// Replaces every agent-day reward when set (test harnesses).
  std::function<double(int add_level, int remove_level)> synthetic_reward;
  /// Checked after every update; returning true ends training early.
  std::function<bool(const MansModel& model, int updates)> stop_when;

  static TrainConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

class BatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Worker count after applying the EMOBSIM_THREADS cap (when set) and a floor of 1.
int effective_workers(int requested);

/// Runs job(0..count-1) on `workers` OpenMP threads with dynamic scheduling.
/// A job that throws is retried once after the parallel phase; a second
/// failure throws BatchError.
void run_jobs(int count, int workers, const std::function<void(int)>& job);

struct Rollout {
  int job_id = 0;
  std::uint64_t seed = 0;
  GeneratedPlan plan;
};

/// Jobs first_job .. first_job + count - 1; job j runs with seed
/// derive_seed(master_seed, j). Output is in job order whatever the schedule.
std::vector<Rollout> collect_rollouts(const Scenario& scenario, const MansModel& model, const SearchConfig& search,
                                      int first_job, int count, int workers, std::uint64_t master_seed);

/// Plain loop with the same seeding; the reference the parallel path is tested against.
std::vector<Rollout> collect_rollouts_serial(const Scenario& scenario, const MansModel& model,
                                             const SearchConfig& search, int first_job, int count,
                                             std::uint64_t master_seed);

/// Turns a batch into per-agent sequences with GAE advantages (normalised
/// over the batch) and discounted returns.
std::vector<PpoSequence> make_sequences(const std::vector<Rollout>& batch, const TrainConfig& config);

struct CurveRow {
  int plans_evaluated = 0;
  double mean_objective = 0;
  double mean_sc = 0;
  double mean_nv = 0;
  double infeasible_day_rate = 0;
};

inline constexpr const char* kCurveHeader = "plans_evaluated,mean_objective,mean_sc,mean_nv,infeasible_day_rate";
std::string curve_csv_row(const CurveRow& row);

struct TrainResult {
  MansModel model;                 // final parameters
  std::vector<double> best_theta;  // parameters behind the best batch
  double best_objective = 0;
  std::vector<CurveRow> curve;
  int updates = 0;
};

using CheckpointSink = std::function<void(const MansModel& model, const std::string& tag)>;
using LogSink = std::function<void(const std::string&)>;

/// PPO until plan_budget plans have been evaluated. Calls `checkpoint` with
/// "initial" first, then periodically ("update_NNNN"), on every new best
/// ("best") and at the end ("final"); `curve` after each update.
TrainResult train(const Scenario& scenario, MansModel model, const TrainConfig& config,
                  const CheckpointSink& checkpoint = {}, const std::function<void(const CurveRow&)>& curve = {},
                  const LogSink& log = {});

/// Evaluation mode: most likely levels, no exploration.
SearchConfig eval_search_config(double w);

/// 1 / (mean |NV| per region-day of the fixed deployment).
double lambda_scale(const Scenario& scenario, const RegionPartition& partition, std::uint64_t seed);

struct LambdaTrial {
  double lambda = 0;
  double objective = 0;
  int infeasible_days = 0;
};

struct LambdaSearch {
  double best = 0;
  std::vector<LambdaTrial> trials;
};

/// Trains each candidate for 20% of the plan budget, evaluates it on
/// `eval_seeds`, and ranks by (no infeasible days, objective); ties go to the
/// smaller lambda. A single candidate is returned without training.
LambdaSearch grid_search_lambda(const Scenario& scenario, const MansModel& model, const TrainConfig& config,
                                std::vector<double> candidates, const std::vector<std::uint64_t>& eval_seeds,
                                const LogSink& log = {});

}  // namespace emob
