#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emob/domain.hpp"

namespace emob {

/// Per-station per-step pick-up counts, one block of 144 * n per day.
struct DemandHistory {
  int n_stations = 0;
  std::vector<std::vector<int>> days;  // days[d][step * n_stations + s]

  int count(int day, int step, int station) const {
    return days[day][static_cast<std::size_t>(step) * n_stations + station];
  }
};

struct GpOptions {
  double length_km = 1.5;
  double length_hours = 2.0;
  double noise_var = 0.1;
  double jitter = 1e-6;
  std::size_t max_points = 512;
};

/// Posterior of a GP over (x, y, hour-of-day) with a constant prior mean and
/// an RBF kernel. Predicts per-step pick-up rates.
class DemandEstimator {
 public:
  DemandEstimator() = default;
  DemandEstimator(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets, const GpOptions& options,
                  const WarningSink& warn);

  double mean(Point p, double hour) const;
  double variance(Point p, double hour) const;
  double rate(Point p, int step_of_day) const { return mean(p, (step_of_day + 0.5) / 6.0); }

  bool jittered() const { return jittered_; }
  std::size_t support_size() const { return static_cast<std::size_t>(inputs_.rows()); }

 private:
  Eigen::VectorXd kernel_column(Point p, double hour) const;

  GpOptions options_;
  Eigen::MatrixXd inputs_;  // rows: (x, y, hour)
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double prior_mean_ = 0.0;
  double signal_var_ = 1.0;
  bool jittered_ = false;
};

/// RBF kernel value between two (x, y, hour) inputs.
double rbf_kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double signal_var, const GpOptions& options);

/// Fits a demand estimator from history; training points are per-station
/// hourly means, thinned to at most options.max_points.
DemandEstimator fit_demand_model(const std::vector<Point>& locations, const DemandHistory& history,
                                 const GpOptions& options = {}, const WarningSink& warn = {});

}  // namespace emob
