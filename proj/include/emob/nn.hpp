#pragma once

#include <cmath>
#include <vector>

namespace emob {

/// Adam over a flat parameter vector.
class Adam {
 public:
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  Adam() = default;
  Adam(std::size_t n, double lr_) : lr(lr_), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    if (m_.size() != params.size()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, t_);
    const double c2 = 1.0 - std::pow(beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1 * m_[i] + (1 - beta1) * grad[i];
      v_[i] = beta2 * v_[i] + (1 - beta2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

  long steps() const { return t_; }

 private:
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// Scales `grad` down to `max_norm` when longer; returns the norm before clipping.
inline double clip_grad_norm(std::vector<double>& grad, double max_norm) {
  double sq = 0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

}  // namespace emob
