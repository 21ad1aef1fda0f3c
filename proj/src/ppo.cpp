#include "emob/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emob {

void compute_advantages(const std::vector<double>& rewards, const std::vector<double>& values, double gamma,
                        double lambda, std::vector<double>& adv, std::vector<double>& ret) {
  const std::size_t T = rewards.size();
  adv.assign(T, 0.0);
  ret.assign(T, 0.0);
  double next_value = 0, next_adv = 0, next_ret = 0;
  for (std::size_t k = T; k-- > 0;) {
    const double delta = rewards[k] + gamma * next_value - values[k];
    adv[k] = delta + gamma * lambda * next_adv;
    ret[k] = rewards[k] + gamma * next_ret;
    next_value = values[k];
    next_adv = adv[k];
    next_ret = ret[k];
  }
}

void normalize_advantages(std::vector<std::vector<double>*> advantages) {
  double sum = 0, n = 0;
  for (auto* a : advantages)
    for (double v : *a) {
      sum += v;
      n += 1;
    }
  if (n == 0) return;
  const double mean = sum / n;
  double sq = 0;
  for (auto* a : advantages)
    for (double v : *a) sq += (v - mean) * (v - mean);
  const double sd = std::max(std::sqrt(sq / n), 1e-8);
  for (auto* a : advantages)
    for (double& v : *a) v = (v - mean) / sd;
}

double ppo_loss(const PolicyNet& net, const std::vector<double>& theta, const std::vector<PpoSequence>& batch,
                const std::vector<int>& which, const PpoConfig& cfg, std::vector<double>* grad, PpoStats* stats) {
  int total_steps = 0;
  for (int i : which) total_steps += static_cast<int>(batch[i].obs.size());
  if (total_steps == 0) return 0.0;
  const double inv = 1.0 / total_steps;
  const int L = net.shape().levels;

  double loss = 0, pl = 0, vl = 0, ent = 0, clipped = 0;
  std::vector<StepCache> caches;
  std::vector<Eigen::VectorXd> d_add, d_rem;
  std::vector<double> d_val;
  for (int i : which) {
    const PpoSequence& seq = batch[i];
    const std::size_t T = seq.obs.size();
    LstmState st = net.initial_state();
    caches.assign(T, {});
    d_add.assign(T, Eigen::VectorXd::Zero(L));
    d_rem.assign(T, Eigen::VectorXd::Zero(L));
    d_val.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const PolicyOutput out = net.step(theta, seq.obs[t], st, grad ? &caches[t] : nullptr);
      const Eigen::VectorXd la = log_softmax(out.add_logits), lr = log_softmax(out.remove_logits);
      const Eigen::VectorXd pa = la.array().exp().matrix(), pr = lr.array().exp().matrix();
      const double logp = la(seq.add[t]) + lr(seq.remove[t]);
      const double ratio = std::exp(logp - seq.log_prob_old[t]);
      const double A = seq.advantage[t];
      const double s1 = ratio * A;
      const double s2 = std::clamp(ratio, 1 - cfg.clip, 1 + cfg.clip) * A;
      const bool unclipped = s1 <= s2;
      if (!unclipped) clipped += 1;
      const double ha = -(pa.array() * la.array()).sum();
      const double hr = -(pr.array() * lr.array()).sum();
      const double verr = out.value - seq.ret[t];

      pl += -std::min(s1, s2);
      vl += verr * verr;
      ent += ha + hr;
      loss += -std::min(s1, s2) + cfg.value_coef * verr * verr - cfg.entropy_coef * (ha + hr);

      if (!grad) continue;
      // d loss / d log p; zero on the clipped branch
      const double dlogp = unclipped ? -ratio * A : 0.0;
      Eigen::VectorXd ga = -pa, gr = -pr;
      ga(seq.add[t]) += 1.0;
      gr(seq.remove[t]) += 1.0;
      // entropy: dH/dz = -p (log p + H)
      const Eigen::VectorXd ea = (pa.array() * (la.array() + ha)).matrix();
      const Eigen::VectorXd er = (pr.array() * (lr.array() + hr)).matrix();
      d_add[t] = inv * (dlogp * ga + cfg.entropy_coef * ea);
      d_rem[t] = inv * (dlogp * gr + cfg.entropy_coef * er);
      d_val[t] = inv * 2.0 * cfg.value_coef * verr;
    }
    if (grad) net.backward(theta, caches, d_add, d_rem, d_val, *grad);
  }
  if (stats) {
    stats->loss += loss * inv;
    stats->policy_loss += pl * inv;
    stats->value_loss += vl * inv;
    stats->entropy += ent * inv;
    stats->clip_fraction += clipped * inv;
  }
  return loss * inv;
}

double max_ratio_deviation(const PolicyNet& net, const std::vector<double>& theta,
                           const std::vector<PpoSequence>& batch) {
  double worst = 0;
  for (const auto& seq : batch) {
    LstmState st = net.initial_state();
    for (std::size_t t = 0; t < seq.obs.size(); ++t) {
      const PolicyOutput out = net.step(theta, seq.obs[t], st);
      const double logp = log_softmax(out.add_logits)(seq.add[t]) + log_softmax(out.remove_logits)(seq.remove[t]);
      worst = std::max(worst, std::abs(std::exp(logp - seq.log_prob_old[t]) - 1.0));
    }
  }
  return worst;
}

PpoStats ppo_update(const PolicyNet& net, std::vector<double>& theta, Adam& adam,
                    const std::vector<PpoSequence>& batch, const PpoConfig& cfg, Rng& rng) {
  PpoStats stats;
  if (batch.empty()) return stats;
  adam.lr = cfg.lr;
  const int n = static_cast<int>(batch.size());
  const int mb = std::clamp(cfg.minibatches, 1, n);
  std::vector<int> order(n);
  std::vector<double> grad(theta.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
    for (int b = 0; b < mb; ++b) {
      const std::vector<int> which(order.begin() + b * n / mb, order.begin() + (b + 1) * n / mb);
      std::fill(grad.begin(), grad.end(), 0.0);
      PpoStats local;
      const double loss = ppo_loss(net, theta, batch, which, cfg, &grad, &local);
      bool finite = std::isfinite(loss);
      for (double g : grad) finite = finite && std::isfinite(g);
      if (!finite) {
        ++stats.skipped;
        continue;
      }
      stats.grad_norm += clip_grad_norm(grad, cfg.max_grad_norm);
      adam.step(theta, grad);
      stats.loss += local.loss;
      stats.policy_loss += local.policy_loss;
      stats.value_loss += local.value_loss;
      stats.entropy += local.entropy;
      stats.clip_fraction += local.clip_fraction;
      ++stats.steps;
    }
  }
  if (stats.steps > 0) {
    const double k = 1.0 / stats.steps;
    stats.loss *= k;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.clip_fraction *= k;
    stats.grad_norm *= k;
  }
  return stats;
}

}  // namespace emob
