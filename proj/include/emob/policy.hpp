#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "emob/rng.hpp"

namespace emob {

struct PolicyShape {
  int obs_dim = 0;
  int hidden = 64;
  int head_hidden = 64;
  int levels = 3;  // entries of the action scale
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// Everything the backward pass needs from one forward step.
struct StepCache {
  Eigen::VectorXd x, h_prev, c_prev;
  Eigen::VectorXd i, f, g, o, c, tanh_c, h;
  Eigen::VectorXd head_act[3];
};

struct PolicyOutput {
  Eigen::VectorXd add_logits;
  Eigen::VectorXd remove_logits;
  double value = 0;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-layer LSTM (gate order i, f, g, o) feeding three two-layer tanh
/// heads: add-level logits, remove-level logits and a state value. All weights
/// live in one flat vector so the optimiser and checkpoints see a plain array.
class PolicyNet {
 public:
  PolicyNet() = default;
  explicit PolicyNet(PolicyShape shape);

  const PolicyShape& shape() const { return shape_; }
  std::size_t size() const { return total_; }

  /// Uniform Glorot for hidden layers, forget-gate bias 1, output layers
  /// scaled down so the initial policy is close to uniform.
  std::vector<double> init(std::uint64_t seed) const;
  LstmState initial_state() const;

  PolicyOutput step(const std::vector<double>& theta, const Eigen::VectorXd& x, LstmState& state,
                    StepCache* cache = nullptr) const;

  /// Accumulates into `grad` the gradient of a loss whose derivatives with
  /// respect to each step's outputs are given. Back-propagates through time.
  void backward(const std::vector<double>& theta, const std::vector<StepCache>& caches,
                const std::vector<Eigen::VectorXd>& d_add, const std::vector<Eigen::VectorXd>& d_remove,
                const std::vector<double>& d_value, std::vector<double>& grad) const;

 private:
  struct HeadOffsets {
    std::size_t w1, b1, w2, b2;
    int out;
  };
  PolicyShape shape_;
  std::size_t wx_ = 0, wh_ = 0, b_ = 0;
  HeadOffsets heads_[3]{};
  std::size_t total_ = 0;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
double entropy(const Eigen::VectorXd& probs);

struct HighLevelDecision {
  int add_level = 0;
  int remove_level = 0;
  double log_prob = 0;  // joint: log p(add) + log p(remove)
  double value = 0;
  Eigen::VectorXd add_probs;
  Eigen::VectorXd remove_probs;
};

/// One high-level step: runs the network, then samples both levels from the
/// caller's stream, or takes the most likely level (lowest index on ties)
/// when `sample` is false. Throws NonFiniteError, after writing the
/// parameters to a dump file, when a logit is not finite.
HighLevelDecision high_level_step(const PolicyNet& net, const std::vector<double>& theta, const Eigen::VectorXd& obs,
                                  LstmState& state, Rng& rng, bool sample, StepCache* cache = nullptr);

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng);
int argmax_level(const Eigen::VectorXd& probs);

}  // namespace emob
