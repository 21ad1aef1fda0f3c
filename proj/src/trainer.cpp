#include "emob/trainer.hpp"

#include "emob/baselines.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>

namespace emob {

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  const nlohmann::json p = j.value("ppo", nlohmann::json::object());
  c.ppo.gamma = p.value("gamma", c.ppo.gamma);
  c.ppo.gae_lambda = p.value("gae_lambda", c.ppo.gae_lambda);
  c.ppo.clip = p.value("clip", c.ppo.clip);
  c.ppo.lr = p.value("lr", c.ppo.lr);
  c.ppo.epochs = p.value("epochs", c.ppo.epochs);
  c.ppo.minibatches = p.value("minibatches", c.ppo.minibatches);
  c.ppo.value_coef = p.value("value_coef", c.ppo.value_coef);
  c.ppo.entropy_coef = p.value("entropy_coef", c.ppo.entropy_coef);
  c.ppo.max_grad_norm = p.value("max_grad_norm", c.ppo.max_grad_norm);
  c.rollouts_per_update = j.value("rollouts_per_update", c.rollouts_per_update);
  c.plan_budget = j.value("plan_budget", c.plan_budget);
  c.workers = j.value("workers", c.workers);
  c.seed = j.value("seed", c.seed);
  c.w = j.value("w", c.w);
  c.lambda = j.value("lambda", c.lambda);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  if (!(c.ppo.clip > 0 && c.ppo.clip < 1)) throw ValidationError("ppo.clip must be in (0, 1)");
  if (c.rollouts_per_update < 1) throw ValidationError("rollouts_per_update must be >= 1");
  if (c.plan_budget < 0) throw ValidationError("plan_budget must be >= 0");
  if (c.ppo.gamma < 0 || c.ppo.gamma > 1) throw ValidationError("ppo.gamma must be in [0, 1]");
  if (c.w < 0 || c.lambda < 0) throw ValidationError("w and lambda must be nonnegative");
  return c;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"ppo",
           {{"gamma", ppo.gamma},
            {"gae_lambda", ppo.gae_lambda},
            {"clip", ppo.clip},
            {"lr", ppo.lr},
            {"epochs", ppo.epochs},
            {"minibatches", ppo.minibatches},
            {"value_coef", ppo.value_coef},
            {"entropy_coef", ppo.entropy_coef},
            {"max_grad_norm", ppo.max_grad_norm}}},
          {"rollouts_per_update", rollouts_per_update},
          {"plan_budget", plan_budget},
          {"workers", workers},
          {"seed", seed},
          {"w", w},
          {"lambda", lambda},
          {"epsilon", epsilon},
          {"checkpoint_every", checkpoint_every}};
}

int effective_workers(int requested) {
  int w = std::max(1, requested);
  if (const char* cap = std::getenv("EMOBSIM_THREADS")) {
    const int c = std::atoi(cap);
    if (c >= 1) w = std::min(w, c);
  }
  return w;
}

void run_jobs(int count, int workers, const std::function<void(int)>& job) {
  if (count <= 0) return;
  std::vector<std::uint8_t> failed(count, 0);
  std::vector<std::string> why(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int j = 0; j < count; ++j) {
    try {
      job(j);
    } catch (const std::exception& e) {
      failed[j] = 1;
      why[j] = e.what();
    } catch (...) {
      failed[j] = 1;
      why[j] = "unknown error";
    }
  }

  std::vector<int> retry;
  for (int j = 0; j < count; ++j)
    if (failed[j]) retry.push_back(j);
  if (retry.empty()) return;
  const int n_retry = static_cast<int>(retry.size());
  std::vector<std::uint8_t> failed_again(n_retry, 0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int k = 0; k < n_retry; ++k) {
    try {
      job(retry[k]);
    } catch (const std::exception& e) {
      failed_again[k] = 1;
      why[retry[k]] = e.what();
    } catch (...) {
      failed_again[k] = 1;
    }
  }
  for (int k = 0; k < n_retry; ++k)
    if (failed_again[k])
      throw BatchError("job " + std::to_string(retry[k]) + " failed twice: " + why[retry[k]]);
}

std::vector<Rollout> collect_rollouts(const Scenario& sc, const MansModel& model, const SearchConfig& search,
                                      int first_job, int count, int workers, std::uint64_t master_seed) {
  std::vector<Rollout> out(std::max(0, count));
  run_jobs(count, workers, [&](int k) {
    Rollout r;
    r.job_id = first_job + k;
    r.seed = derive_seed(master_seed, static_cast<std::uint64_t>(r.job_id));
    r.plan = generate_plan(model, sc, r.seed, search);
    out[k] = std::move(r);
  });
  return out;
}

std::vector<Rollout> collect_rollouts_serial(const Scenario& sc, const MansModel& model, const SearchConfig& search,
                                             int first_job, int count, std::uint64_t master_seed) {
  std::vector<Rollout> out;
  for (int k = 0; k < count; ++k) {
    Rollout r;
    r.job_id = first_job + k;
    r.seed = derive_seed(master_seed, static_cast<std::uint64_t>(r.job_id));
    r.plan = generate_plan(model, sc, r.seed, search);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PpoSequence> make_sequences(const std::vector<Rollout>& batch, const TrainConfig& config) {
  std::vector<PpoSequence> seqs;
  for (const auto& r : batch)
    for (const auto& region : r.plan.trajectory.regions) {
      PpoSequence s;
      std::vector<double> rewards, values;
      for (const auto& step : region) {
        s.obs.push_back(step.obs);
        s.add.push_back(step.add_level);
        s.remove.push_back(step.remove_level);
        s.log_prob_old.push_back(step.log_prob);
        values.push_back(step.value);
        rewards.push_back(config.synthetic_reward ? config.synthetic_reward(step.add_level, step.remove_level)
                                                  : step.reward);
      }
      compute_advantages(rewards, values, config.ppo.gamma, config.ppo.gae_lambda, s.advantage, s.ret);
      seqs.push_back(std::move(s));
    }
  std::vector<std::vector<double>*> adv;
  for (auto& s : seqs) adv.push_back(&s.advantage);
  normalize_advantages(adv);
  return seqs;
}

std::string curve_csv_row(const CurveRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g", r.plans_evaluated, r.mean_objective, r.mean_sc,
                r.mean_nv, r.infeasible_day_rate);
  return buf;
}

namespace {

SearchConfig train_search_config(const TrainConfig& c) {
  SearchConfig s;
  s.epsilon = c.epsilon;
  s.sample = true;
  s.reward.w = c.w;
  s.reward.lambda = c.lambda;
  s.reward.gamma = c.ppo.gamma;
  return s;
}

}  // namespace

TrainResult train(const Scenario& sc, MansModel model, const TrainConfig& config, const CheckpointSink& checkpoint,
                  const std::function<void(const CurveRow&)>& curve, const LogSink& log) {
  TrainResult res;
  res.best_theta = model.theta;
  res.best_objective = -std::numeric_limits<double>::infinity();
  if (checkpoint) checkpoint(model, "initial");

  const int workers = effective_workers(config.workers);
  const SearchConfig search = train_search_config(config);
  Adam adam(model.theta.size(), config.ppo.lr);
  int evaluated = 0;
  while (evaluated < config.plan_budget) {
    const int k = std::min(config.rollouts_per_update, config.plan_budget - evaluated);
    const std::vector<Rollout> batch = collect_rollouts(sc, model, search, evaluated, k, workers, config.seed);
    evaluated += k;

    CurveRow row;
    row.plans_evaluated = evaluated;
    int days = 0, infeasible = 0;
    for (const auto& r : batch) {
      const EpisodeMetrics& e = r.plan.episode.report.episode;
      row.mean_objective += e.objective / k;
      row.mean_sc += e.sc / k;
      row.mean_nv += e.nv.units() / k;
      infeasible += e.infeasible_days;
      days += static_cast<int>(r.plan.episode.report.per_day.size());
    }
    row.infeasible_day_rate = days > 0 ? static_cast<double>(infeasible) / days : 0.0;
    const bool improved = row.mean_objective > res.best_objective;
    if (improved) {
      res.best_objective = row.mean_objective;
      res.best_theta = model.theta;  // the parameters that produced this batch
    }

    const std::vector<PpoSequence> seqs = make_sequences(batch, config);
    Rng rng(derive_seed(config.seed, 0x70706f00ULL + static_cast<std::uint64_t>(res.updates)));
    const PpoStats stats = ppo_update(model.net, model.theta, adam, seqs, config.ppo, rng);
    ++res.updates;
    if (stats.skipped > 0 && log)
      log("update " + std::to_string(res.updates) + ": skipped " + std::to_string(stats.skipped) +
          " minibatch(es) with a non-finite loss");

    res.curve.push_back(row);
    if (curve) curve(row);
    if (checkpoint) {
      if (improved) {
        MansModel best = model;
        best.theta = res.best_theta;
        checkpoint(best, "best");
      }
      if (config.checkpoint_every > 0 && res.updates % config.checkpoint_every == 0) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "update_%04d", res.updates);
        checkpoint(model, tag);
      }
    }
    if (config.stop_when && config.stop_when(model, res.updates)) break;
  }
  if (checkpoint && config.plan_budget > 0) checkpoint(model, "final");
  res.model = std::move(model);
  return res;
}

SearchConfig eval_search_config(double w) {
  SearchConfig s;
  s.epsilon = 0.0;
  s.sample = false;
  s.reward.w = w;
  return s;
}

double lambda_scale(const Scenario& sc, const RegionPartition& part, std::uint64_t seed) {
  const DeploymentPlan fd = plan_fixed(sc.initial_active, sc.episode_days);
  const EpisodeResult r = run_episode(sc, fd, seed);
  double sum = 0;
  int n = 0;
  for (std::size_t d = 1; d < r.history.size(); ++d) {
    const auto mask = to_mask(r.history[d].snapshot.active, sc.pool.size());
    for (int reg = 0; reg < part.count(); ++reg) {
      const RegionDayMetrics m =
          region_day_metrics(part.regions[reg].members, part.pois_of[reg], mask, r.history[d].tallies, sc.pool);
      sum += std::abs(m.nv.units());
      ++n;
    }
  }
  const double mean = n > 0 ? sum / n : 0.0;
  return mean > 0 ? 1.0 / mean : 1.0;
}

LambdaSearch grid_search_lambda(const Scenario& sc, const MansModel& model, const TrainConfig& config,
                                std::vector<double> candidates, const std::vector<std::uint64_t>& eval_seeds,
                                const LogSink& log) {
  if (candidates.empty()) throw std::invalid_argument("grid search needs at least one lambda");
  std::sort(candidates.begin(), candidates.end());
  LambdaSearch out;
  if (candidates.size() == 1) {
    out.best = candidates.front();
    out.trials.push_back({out.best, 0.0, 0});
    return out;
  }
  TrainConfig short_cfg = config;
  short_cfg.plan_budget = std::max(config.rollouts_per_update, config.plan_budget / 5);
  for (double lam : candidates) {
    short_cfg.lambda = lam;
    const TrainResult tr = train(sc, model, short_cfg);
    LambdaTrial t{lam, 0.0, 0};
    const SearchConfig ev = eval_search_config(config.w);
    for (std::uint64_t s : eval_seeds) {
      const GeneratedPlan g = generate_plan(tr.model, sc, s, ev);
      t.objective += g.episode.report.episode.objective / static_cast<double>(eval_seeds.size());
      t.infeasible_days += g.episode.report.episode.infeasible_days;
    }
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "lambda %.6g: objective %.4f, infeasible days %d", lam, t.objective,
                    t.infeasible_days);
      log(buf);
    }
    out.trials.push_back(t);
  }
  // ascending lambda, so keeping the first maximum gives the smaller one on ties
  const LambdaTrial* best = &out.trials.front();
  for (const auto& t : out.trials) {
    const bool t_ok = t.infeasible_days == 0, b_ok = best->infeasible_days == 0;
    if (t_ok != b_ok ? t_ok : t.objective > best->objective) best = &t;
  }
  out.best = best->lambda;
  return out;
}

}  // namespace emob
