#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "emob/checkpoint.hpp"
#include "emob/ppo.hpp"
#include "emob/trainer.hpp"
#include "toy.hpp"

using namespace emob;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Scenario& train_city() {
  static const Scenario sc = toy::small_city(12, 40, 10, 4);
  return sc;
}

MansModel tiny_model(int hidden = 16) {
  ModelOptions mo;
  mo.hidden = hidden;
  mo.predictor = PredictorKind::MovingAverage;
  mo.normalizer_episodes = 1;
  return build_model(train_city(), mo);
}

}  // namespace

TEST_CASE("advantages and returns") {
  std::vector<double> adv, ret;
  SUBCASE("gamma 0: one-step advantage") {
    compute_advantages({1.0, -2.0, 0.5}, {0.3, 0.1, -0.4}, 0.0, 0.95, adv, ret);
    CHECK(adv[0] == doctest::Approx(0.7));
    CHECK(adv[1] == doctest::Approx(-2.1));
    CHECK(adv[2] == doctest::Approx(0.9));
    CHECK(ret == std::vector<double>{1.0, -2.0, 0.5});
  }
  SUBCASE("constant reward, zero values") {
    compute_advantages({1, 1, 1}, {0, 0, 0}, 0.99, 0.95, adv, ret);
    CHECK(ret[0] == doctest::Approx(2.9701));
    CHECK(ret[1] == doctest::Approx(1.99));
    CHECK(ret[2] == doctest::Approx(1.0));
    // hand-rolled GAE: delta = 1 everywhere
    CHECK(adv[2] == doctest::Approx(1.0));
    CHECK(adv[1] == doctest::Approx(1 + 0.99 * 0.95));
    CHECK(adv[0] == doctest::Approx(1 + 0.99 * 0.95 * (1 + 0.99 * 0.95)));
  }
  SUBCASE("exact values leave nothing to normalise") {
    compute_advantages({1, 1, 1}, {2.9701, 1.99, 1.0}, 0.99, 0.95, adv, ret);
    std::vector<double> other = adv;
    normalize_advantages({&adv, &other});
    for (double a : adv) CHECK(std::abs(a) < 1e-9);
  }
  SUBCASE("normalisation is joint over the batch") {
    std::vector<double> a{1, 2}, b{3, 4, 5};
    normalize_advantages({&a, &b});
    double mean = (a[0] + a[1] + b[0] + b[1] + b[2]) / 5;
    double var = 0;
    for (double x : {a[0], a[1], b[0], b[1], b[2]}) var += (x - mean) * (x - mean) / 4;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(0.15));  // population vs sample std
    CHECK(a[0] < a[1]);
    CHECK(a[1] < b[0]);
  }
}

namespace {

PpoSequence random_sequence(const PolicyNet& net, const std::vector<double>& theta, Rng& rng, int steps,
                            bool fresh) {
  PpoSequence s;
  LstmState st = net.initial_state();
  for (int t = 0; t < steps; ++t) {
    Eigen::VectorXd x(net.shape().obs_dim);
    for (int i = 0; i < x.size(); ++i) x(i) = normal(rng);
    const HighLevelDecision d = high_level_step(net, theta, x, st, rng, true);
    s.obs.push_back(x);
    s.add.push_back(d.add_level);
    s.remove.push_back(d.remove_level);
    s.log_prob_old.push_back(fresh ? d.log_prob : d.log_prob + uniform(rng, -0.5, 0.5));
    s.advantage.push_back(normal(rng));
    s.ret.push_back(normal(rng));
  }
  return s;
}

}  // namespace

TEST_CASE("fresh batch has unit ratios") {
  const PolicyNet net(PolicyShape{observation_size(2), 8, 8, 3});
  const auto theta = net.init(3);
  Rng rng(5);
  std::vector<PpoSequence> batch;
  for (int k = 0; k < 6; ++k) batch.push_back(random_sequence(net, theta, rng, 5, true));
  CHECK(max_ratio_deviation(net, theta, batch) < 1e-6);

  // with rho = 1 the clipped surrogate is just -mean(A)
  PpoConfig cfg;
  cfg.value_coef = 0;
  cfg.entropy_coef = 0;
  std::vector<int> all{0, 1, 2, 3, 4, 5};
  double mean_adv = 0;
  int n = 0;
  for (const auto& s : batch)
    for (double a : s.advantage) {
      mean_adv += a;
      ++n;
    }
  CHECK(ppo_loss(net, theta, batch, all, cfg, nullptr) == doctest::Approx(-mean_adv / n));
}

TEST_CASE("PPO loss gradient matches central differences") {
  // two candidates, one day, one region
  const PolicyNet net(PolicyShape{observation_size(2), 8, 8, 3});
  const PpoConfig cfg;
  Rng rng(77);
  int checked = 0;
  for (int draw = 0; draw < 50; ++draw) {
    auto theta = net.init(100 + draw);
    for (double& t : theta) t += 0.1 * normal(rng);
    std::vector<PpoSequence> batch{random_sequence(net, theta, rng, 1, false)};
    // keep the ratio away from the clip kinks
    const double dev = max_ratio_deviation(net, theta, batch);
    if (std::abs(dev - cfg.clip) < 0.02) continue;
    std::vector<double> grad(net.size(), 0.0);
    ppo_loss(net, theta, batch, {0}, cfg, &grad);
    double err = 0, norm = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto tp = theta, tm = theta;
      tp[i] += 1e-5;
      tm[i] -= 1e-5;
      const double fd =
          (ppo_loss(net, tp, batch, {0}, cfg, nullptr) - ppo_loss(net, tm, batch, {0}, cfg, nullptr)) / 2e-5;
      err += (fd - grad[i]) * (fd - grad[i]);
      norm += fd * fd;
    }
    CHECK(std::sqrt(err) <= 1e-4 * std::sqrt(norm));
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("one-step bandit converges without an entropy bonus") {
  const PolicyNet net(PolicyShape{observation_size(2), 16, 16, 3});
  auto theta = net.init(9);
  PpoConfig cfg;
  cfg.entropy_coef = 0;
  Adam adam(theta.size(), cfg.lr);
  Rng rng(4);
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(net.shape().obs_dim);
  obs(0) = 1;
  auto reward = [](int a, int r) { return a == 2 && r == 1 ? 1.0 : 0.0; };
  for (int update = 0; update < 200; ++update) {
    std::vector<PpoSequence> batch;
    for (int k = 0; k < 16; ++k) {
      LstmState st = net.initial_state();
      const HighLevelDecision d = high_level_step(net, theta, obs, st, rng, true);
      PpoSequence s;
      s.obs = {obs};
      s.add = {d.add_level};
      s.remove = {d.remove_level};
      s.log_prob_old = {d.log_prob};
      compute_advantages({reward(d.add_level, d.remove_level)}, {d.value}, cfg.gamma, cfg.gae_lambda, s.advantage,
                         s.ret);
      batch.push_back(std::move(s));
    }
    std::vector<std::vector<double>*> adv;
    for (auto& s : batch) adv.push_back(&s.advantage);
    normalize_advantages(adv);
    ppo_update(net, theta, adam, batch, cfg, rng);
  }
  LstmState st = net.initial_state();
  const HighLevelDecision d = high_level_step(net, theta, obs, st, rng, false);
  CHECK(d.add_probs(2) * d.remove_probs(1) >= 0.95);
}

TEST_CASE("rollout collection: parallel equals serial, K = 0 is empty") {
  const MansModel model = tiny_model();
  SearchConfig search;
  const auto serial = collect_rollouts_serial(train_city(), model, search, 3, 6, 99);
  const auto one = collect_rollouts(train_city(), model, search, 3, 6, 1, 99);
  const auto four = collect_rollouts(train_city(), model, search, 3, 6, 4, 99);
  REQUIRE(four.size() == 6);
  for (int k = 0; k < 6; ++k) {
    CHECK(four[k].job_id == 3 + k);
    CHECK(four[k].seed == derive_seed(99, 3 + k));
    for (const auto* other : {&serial[k], &one[k]}) {
      CHECK(four[k].plan.episode.report.episode.objective == other->plan.episode.report.episode.objective);
      for (std::size_t d = 0; d < four[k].plan.episode.plan.snapshots.size(); ++d)
        CHECK(four[k].plan.episode.plan.snapshots[d] == other->plan.episode.plan.snapshots[d]);
      CHECK(four[k].plan.trajectory.regions[0].back().log_prob == other->plan.trajectory.regions[0].back().log_prob);
    }
  }
  CHECK(collect_rollouts(train_city(), model, search, 0, 0, 4, 99).empty());
}

TEST_CASE("job runner retries once, then fails the batch") {
  std::vector<std::atomic<int>> tries(10);
  run_jobs(10, 4, [&](int j) {
    if (++tries[j] == 1 && j % 3 == 0) throw std::runtime_error("flaky");
  });
  for (int j = 0; j < 10; ++j) CHECK(tries[j] == (j % 3 == 0 ? 2 : 1));

  std::atomic<int> calls{0};
  CHECK_THROWS_AS(run_jobs(4, 2,
                           [&](int j) {
                             ++calls;
                             if (j == 2) throw std::runtime_error("broken");
                           }),
                  BatchError);
  CHECK(calls == 5);
  run_jobs(0, 4, [](int) { FAIL("no jobs expected"); });
}

TEST_CASE("training loop") {
  const MansModel model = tiny_model();
  std::vector<std::string> tags;
  auto sink = [&](const MansModel&, const std::string& tag) { tags.push_back(tag); };

  SUBCASE("budget 0 leaves only the initial checkpoint") {
    TrainConfig cfg;
    cfg.plan_budget = 0;
    const TrainResult r = train(train_city(), model, cfg, sink);
    CHECK(tags == std::vector<std::string>{"initial"});
    CHECK(r.updates == 0);
    CHECK(r.model.theta == model.theta);
  }
  SUBCASE("curve rows, checkpoints and reproducibility") {
    TrainConfig cfg;
    cfg.plan_budget = 20;
    cfg.rollouts_per_update = 8;
    cfg.checkpoint_every = 2;
    std::vector<CurveRow> rows;
    const TrainResult a = train(train_city(), model, cfg, sink, [&](const CurveRow& r) { rows.push_back(r); });
    CHECK(a.updates == 3);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].plans_evaluated == 8);
    CHECK(rows[2].plans_evaluated == 20);
    CHECK(tags.front() == "initial");
    CHECK(tags.back() == "final");
    CHECK(std::count(tags.begin(), tags.end(), "update_0002") == 1);
    CHECK(std::count(tags.begin(), tags.end(), "best") >= 1);
    double best = rows[0].mean_objective;
    for (const auto& r : rows) best = std::max(best, r.mean_objective);
    CHECK(a.best_objective == best);

    cfg.workers = 3;
    const TrainResult b = train(train_city(), model, cfg);
    CHECK(a.model.theta == b.model.theta);
    CHECK(a.best_theta == b.best_theta);
  }
  CHECK(std::string(kCurveHeader) == "plans_evaluated,mean_objective,mean_sc,mean_nv,infeasible_day_rate");
}

TEST_CASE("synthetic reward on the no-change level is learned") {
  const MansModel model = tiny_model();
  TrainConfig cfg;
  cfg.plan_budget = 480;
  cfg.ppo.lr = 1e-3;
  cfg.synthetic_reward = [](int a, int r) { return a == 0 && r == 0 ? 1.0 : 0.0; };
  const TrainResult res = train(train_city(), model, cfg);

  const GeneratedPlan g = generate_plan(res.model, train_city(), 5, eval_search_config(1.0));
  double p = 0;
  int n = 0;
  for (const auto& region : g.trajectory.regions) {
    LstmState st = res.model.net.initial_state();
    Rng rng(0);
    for (const auto& step : region) {
      const HighLevelDecision d = high_level_step(res.model.net, res.model.theta, step.obs, st, rng, false);
      p += d.add_probs(0) * d.remove_probs(0);
      ++n;
    }
  }
  CHECK(p / n >= 0.9);
}

TEST_CASE("checkpoint save -> load -> save is byte-identical") {
  const MansModel model = tiny_model();
  const auto dir = std::filesystem::temp_directory_path() / "emob_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  save_checkpoint(model, a, {{"note", "x"}});
  nlohmann::json meta;
  const MansModel back = load_checkpoint(train_city(), a, &meta);
  save_checkpoint(back, b, meta);
  CHECK(slurp(a) == slurp(b));
  CHECK(back.theta == model.theta);

  // a checkpoint from a different city is refused
  const Scenario other = toy::small_city(99, 40, 10, 4);
  CHECK_THROWS_AS(load_checkpoint(other, a), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("lambda grid search") {
  const MansModel model = tiny_model(8);
  TrainConfig cfg;
  cfg.plan_budget = 40;
  SUBCASE("single candidate is returned untouched") {
    const LambdaSearch s = grid_search_lambda(train_city(), model, cfg, {0.7}, {1});
    CHECK(s.best == 0.7);
  }
  SUBCASE("ties go to the smaller lambda") {
    // lambda only enters through the reward, which the harness replaces
    cfg.synthetic_reward = [](int, int) { return 1.0; };
    const LambdaSearch s = grid_search_lambda(train_city(), model, cfg, {2.0, 0.5, 1.0}, {1, 2});
    REQUIRE(s.trials.size() == 3);
    CHECK(s.trials[0].objective == s.trials[2].objective);
    CHECK(s.best == 0.5);
  }
}

TEST_CASE("train config validation") {
  CHECK_NOTHROW(TrainConfig::from_json(nlohmann::json::object()));
  CHECK_THROWS_AS(TrainConfig::from_json({{"plan_budget", -1}}), ValidationError);
  CHECK_THROWS_AS(TrainConfig::from_json({{"rollouts_per_update", 0}}), ValidationError);
  CHECK_THROWS_AS(TrainConfig::from_json({{"ppo", {{"clip", 1.5}}}}), ValidationError);
  const TrainConfig c = TrainConfig::from_json({{"seed", 5}, {"ppo", {{"epochs", 2}}}});
  CHECK(c.seed == 5);
  CHECK(c.ppo.epochs == 2);
  CHECK(TrainConfig::from_json(c.to_json()).to_json() == c.to_json());
}
