#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "emob/simulator.hpp"

namespace emob {

/// Candidate graph with symmetric-normalised adjacency D^-1/2 (A + I) D^-1/2.
/// Edges join stations within `radius_km`; a station with no such neighbour
/// is linked to its `knn` nearest instead.
struct DemandGraph {
  Eigen::SparseMatrix<double> norm_adj;
  std::vector<int> degree;  // neighbours, self excluded

  static DemandGraph build(const CandidatePool& pool, double radius_km = 2.0, int knn = 4);
  int size() const { return static_cast<int>(norm_adj.rows()); }
};

struct DemandForecast {
  std::vector<double> pickups;
  std::vector<double> returns;
};

/// Up to three previous days of per-station counts, most recent first.
struct DemandWindow {
  std::vector<std::vector<double>> pickups;
  std::vector<std::vector<double>> returns;
  std::vector<std::uint8_t> active;
  bool next_weekend = false;

  static DemandWindow from_history(const std::vector<DayRecord>& history, const std::vector<StationId>& active,
                                   int target_day, std::size_t n);
};

struct GcnTrainOptions {
  int epochs = 300;
  double lr = 1e-2;
  std::uint64_t seed = 1;
};

/// Two-layer graph convolution without biases: Y = A relu(A X W1) W2.
/// Every node feature is a count or a count-scaled flag, so an all-zero
/// history maps to exactly zero.
class GcnRegressor {
 public:
  static constexpr int kFeatures = 9;
  static constexpr int kHidden = 16;
  static constexpr int kOutputs = 2;  // pick-ups, returns

  GcnRegressor() = default;
  GcnRegressor(DemandGraph graph, std::vector<int> docks);

  void init(std::uint64_t seed);
  Eigen::MatrixXd features(const DemandWindow& window) const;
  DemandForecast predict(const DemandWindow& window) const;

  /// Mean squared error (in count units / scale) and its gradient.
  double loss_and_grad(const std::vector<DemandWindow>& inputs, const std::vector<DemandForecast>& targets,
                       std::vector<double>* grad) const;
  /// Full-batch Adam on squared error; returns the final loss.
  double fit(const std::vector<DemandWindow>& inputs, const std::vector<DemandForecast>& targets,
             const GcnTrainOptions& options = {});

  std::vector<double> params;
  double count_scale = 1.0;
  bool trained = false;

  const DemandGraph& graph() const { return graph_; }

 private:
  DemandGraph graph_;
  std::vector<int> docks_;
  double mean_docks_ = 1.0;
};

enum class PredictorKind { Gcn, MovingAverage };

/// Next-day pick-up and return counts per candidate. Cold start (no history)
/// falls back to the scenario's expected demand.
class DemandPredictor {
 public:
  DemandPredictor() = default;
  DemandPredictor(const Scenario& scenario, PredictorKind kind);

  DemandForecast predict(const Scenario& scenario, const std::vector<DayRecord>& history,
                         const std::vector<StationId>& active, int target_day) const;

  PredictorKind kind = PredictorKind::MovingAverage;
  GcnRegressor gcn;

  nlohmann::json to_json() const;
  void load_json(const Scenario& scenario, const nlohmann::json& j);
};

DemandForecast moving_average_forecast(const DemandWindow& window);
DemandForecast prior_forecast(const Scenario& scenario, int day);

/// Training pairs (window, next-day counts) from simulated episodes.
void append_training_pairs(const std::vector<DayRecord>& history, std::size_t n, std::vector<DemandWindow>& inputs,
                           std::vector<DemandForecast>& targets);

/// Simulates `episodes` baseline episodes (cycling fd, rev, cov, io) and fits
/// the GCN on their history.
DemandPredictor train_demand_predictor(const Scenario& scenario, int episodes, std::uint64_t seed,
                                       const GcnTrainOptions& options = {});

}  // namespace emob
