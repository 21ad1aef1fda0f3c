#include "emob/gp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace emob {

double rbf_kernel(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double signal_var, const GpOptions& o) {
  const double dx = a(0) - b(0);
  const double dy = a(1) - b(1);
  const double dt = a(2) - b(2);
  return signal_var * std::exp(-(dx * dx + dy * dy) / (2 * o.length_km * o.length_km) -
                               dt * dt / (2 * o.length_hours * o.length_hours));
}

DemandEstimator::DemandEstimator(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets, const GpOptions& options,
                                 const WarningSink& warn)
    : options_(options), inputs_(std::move(inputs)) {
  const Eigen::Index n = inputs_.rows();
  if (n == 0) return;
  prior_mean_ = targets.mean();
  const Eigen::VectorXd centered = targets.array() - prior_mean_;
  signal_var_ = std::max(centered.squaredNorm() / static_cast<double>(n), 1e-6);

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = rbf_kernel(inputs_.row(i).transpose(), inputs_.row(j).transpose(), signal_var_, options_);
      k(i, j) = v;
      k(j, i) = v;
    }
  k.diagonal().array() += options_.noise_var;

  chol_.compute(k);
  if (chol_.info() != Eigen::Success) {
    jittered_ = true;
    if (warn) warn("GP kernel matrix is not positive definite; adding jitter to the diagonal");
    double jitter = options_.jitter;
    for (int attempt = 0; attempt < 8 && chol_.info() != Eigen::Success; ++attempt) {
      Eigen::MatrixXd kj = k;
      kj.diagonal().array() += jitter * signal_var_;
      chol_.compute(kj);
      jitter *= 10;
    }
    if (chol_.info() != Eigen::Success) throw std::runtime_error("GP kernel factorization failed after jitter");
  }
  alpha_ = chol_.solve(centered);
}

Eigen::VectorXd DemandEstimator::kernel_column(Point p, double hour) const {
  const Eigen::Vector3d q(p.x, p.y, hour);
  Eigen::VectorXd ks(inputs_.rows());
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
    ks(i) = rbf_kernel(inputs_.row(i).transpose(), q, signal_var_, options_);
  return ks;
}

double DemandEstimator::mean(Point p, double hour) const {
  if (inputs_.rows() == 0) return prior_mean_;
  return prior_mean_ + kernel_column(p, hour).dot(alpha_);
}

double DemandEstimator::variance(Point p, double hour) const {
  if (inputs_.rows() == 0) return signal_var_;
  const Eigen::VectorXd ks = kernel_column(p, hour);
  const double v = signal_var_ - ks.dot(chol_.solve(ks));
  return std::max(v, 0.0);
}

DemandEstimator fit_demand_model(const std::vector<Point>& locations, const DemandHistory& history,
                                 const GpOptions& options, const WarningSink& warn) {
  if (history.days.size() < 2) throw ValidationError("demand model needs at least two days of history");
  const int n = history.n_stations;
  if (n != static_cast<int>(locations.size())) throw ValidationError("history does not match station count");

  // Hourly mean per-step rate at each station.
  std::vector<double> hourly(static_cast<std::size_t>(n) * 24, 0.0);
  for (const auto& day : history.days)
    for (int k = 0; k < kStepsPerDay; ++k)
      for (int s = 0; s < n; ++s) hourly[static_cast<std::size_t>(s) * 24 + k / 6] += day[static_cast<std::size_t>(k) * n + s];
  const double denom = 6.0 * static_cast<double>(history.days.size());
  for (double& v : hourly) v /= denom;

  const std::size_t total = hourly.size();
  const std::size_t m = std::min(total, options.max_points);
  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(m), 3);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    // Even stride through the (station, hour) pairs.
    const std::size_t idx = (i * total) / m;
    const std::size_t s = idx / 24;
    const std::size_t h = idx % 24;
    inputs(static_cast<Eigen::Index>(i), 0) = locations[s].x;
    inputs(static_cast<Eigen::Index>(i), 1) = locations[s].y;
    inputs(static_cast<Eigen::Index>(i), 2) = h + 0.5;
    targets(static_cast<Eigen::Index>(i)) = hourly[idx];
  }
  return DemandEstimator(std::move(inputs), targets, options, warn);
}

}  // namespace emob
