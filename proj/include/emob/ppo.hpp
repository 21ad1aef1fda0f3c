#pragma once

#include <vector>

#include <Eigen/Dense>

#include "emob/nn.hpp"
#include "emob/policy.hpp"

namespace emob {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double lr = 3e-4;
  int epochs = 4;
  int minibatches = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
};

/// GAE(gamma, lambda) advantages and discounted reward-to-go returns for one
/// finite sequence; the value after the last step is 0.
void compute_advantages(const std::vector<double>& rewards, const std::vector<double>& values, double gamma,
                        double lambda, std::vector<double>& advantages, std::vector<double>& returns);

/// Shifts and scales all advantages together to mean 0, std 1 (std floored at 1e-8).
void normalize_advantages(std::vector<std::vector<double>*> advantages);

/// One agent's decisions over an episode, ready for the update.
struct PpoSequence {
  std::vector<Eigen::VectorXd> obs;
  std::vector<int> add;
  std::vector<int> remove;
  std::vector<double> log_prob_old;
  std::vector<double> advantage;
  std::vector<double> ret;
};

struct PpoStats {
  double loss = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double grad_norm = 0;
  double clip_fraction = 0;
  int steps = 0;
  int skipped = 0;  // minibatches dropped for a non-finite loss
};

/// Mean over all steps of the selected sequences of
///   -min(rho A, clip(rho, 1-c, 1+c) A) + value_coef (V - R)^2 - entropy_coef H,
/// with rho = exp(log p - log p_old) over the joint (add, remove) action.
/// Adds d loss / d theta to `grad` when given.
double ppo_loss(const PolicyNet& net, const std::vector<double>& theta, const std::vector<PpoSequence>& batch,
                const std::vector<int>& which, const PpoConfig& config, std::vector<double>* grad,
                PpoStats* stats = nullptr);

/// Largest |rho - 1| over the batch for the given parameters.
double max_ratio_deviation(const PolicyNet& net, const std::vector<double>& theta,
                           const std::vector<PpoSequence>& batch);

/// `epochs` passes over shuffled minibatches of sequences; each minibatch is
/// one clipped-gradient Adam step.
PpoStats ppo_update(const PolicyNet& net, std::vector<double>& theta, Adam& adam,
                    const std::vector<PpoSequence>& batch, const PpoConfig& config, Rng& rng);

}  // namespace emob
