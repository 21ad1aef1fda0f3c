#include "emob/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "emob/checkpoint.hpp"
#include "emob/evaluation.hpp"
#include "emob/report.hpp"
#include "emob/rng.hpp"
#include "emob/scenario.hpp"
#include "emob/trainer.hpp"

#ifndef EMOB_VERSION
#define EMOB_VERSION "0.1.0"
#endif

namespace fs = std::filesystem;

namespace emob {

std::string version_string() { return EMOB_VERSION; }

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      if (dash != std::string::npos && dash > 0) {
        const std::uint64_t a = std::stoull(item.substr(0, dash)), b = std::stoull(item.substr(dash + 1));
        if (b < a) throw ValidationError("bad seed range " + item);
        for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
      } else {
        out.push_back(std::stoull(item));
      }
    } catch (const std::logic_error&) {
      throw ValidationError("bad seed '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("no seeds given");
  return out;
}

// plain numbers or fractions such as 7/3
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto slash = item.find('/');
      if (slash == std::string::npos)
        out.push_back(std::stod(item));
      else
        out.push_back(std::stod(item.substr(0, slash)) / std::stod(item.substr(slash + 1)));
    } catch (const std::logic_error&) {
      throw ValidationError("bad value '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("no values given");
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

void ensure_dir(const fs::path& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

fs::path parent_dir(const std::string& file) {
  fs::path p = fs::path(file).parent_path();
  return p.empty() ? fs::path(".") : p;
}

struct ModelSection {
  ModelOptions model;
  std::vector<std::uint64_t> eval_seeds{101, 102, 103};
};

ModelSection model_section(const nlohmann::json& cfg, std::uint64_t seed) {
  ModelSection s;
  s.model.seed = seed;
  const nlohmann::json m = cfg.value("model", nlohmann::json::object());
  s.model.action_scale = m.value("action_scale", s.model.action_scale);
  s.model.alpha = m.value("alpha", s.model.alpha);
  s.model.hidden = m.value("hidden", s.model.hidden);
  s.model.predictor_episodes = m.value("predictor_episodes", s.model.predictor_episodes);
  s.model.normalizer_episodes = m.value("normalizer_episodes", s.model.normalizer_episodes);
  const std::string kind = m.value("predictor", std::string("gcn"));
  if (kind == "gcn")
    s.model.predictor = PredictorKind::Gcn;
  else if (kind == "moving_average")
    s.model.predictor = PredictorKind::MovingAverage;
  else
    throw ValidationError("model.predictor must be gcn or moving_average");
  if (s.model.alpha < 0 || s.model.alpha > 1) throw ValidationError("model.alpha must lie in [0, 1]");
  if (s.model.hidden < 1) throw ValidationError("model.hidden must be >= 1");
  s.eval_seeds = cfg.value("lambda_eval_seeds", s.eval_seeds);
  return s;
}

/// Collects what the manifest needs while a command runs.
struct Run {
  RunManifest manifest;
  fs::path dir;

  Run(std::string command, int argc, const char* const* argv) {
    manifest.command = std::move(command);
    for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);
    manifest.version = version_string();
    manifest.started_utc = utc_now();
  }
  void finish() {
    manifest.finished_utc = utc_now();
    ensure_dir(dir);
    write_file_atomic((dir / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
  }
};

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(parent_dir(path.string()));
  write_file_atomic(path.string(), text);
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},       {"argv", argv},       {"config_hash", config_hash},
          {"scenario_hash", scenario_hash}, {"seeds", seeds}, {"version", version},
          {"started_utc", started_utc}, {"finished_utc", finished_utc}};
}

std::string hash_file(const std::string& path) { return hex64(fnv1a(read_text_file(path))); }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic e-mobility station deployment simulator and planners", "emobsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  std::string scenario_path, config_path, out_path, plan_path, checkpoint_path, report_path;
  std::string seeds_text = "1-5", planners_text = "fd,rev,cov,oo,io,mans", reference = "fd";
  std::string parameter, values_text, action_scale_text, planner;
  std::uint64_t seed = 1;
  double w = 1.0, lambda = -1.0, epsilon = -1.0;
  int workers = 0, plan_budget = -1;
  bool grid_lambda = false;

  auto* gen = app.add_subcommand("gen-scenario", "Generate a synthetic city");
  gen->add_option("--config", config_path, "JSON config (scenario section or top level)")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", out_path, "scenario file")->required();

  auto* sim = app.add_subcommand("simulate", "Replay a fixed plan");
  sim->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--plan", plan_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed)->required();
  sim->add_option("--w", w)->check(CLI::NonNegativeNumber);
  sim->add_option("--out", out_path, "report file")->required();

  auto* tr = app.add_subcommand("train", "Train the neural planner");
  tr->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  tr->add_option("--config", config_path)->check(CLI::ExistingFile);
  tr->add_option("--workers", workers)->check(CLI::PositiveNumber);
  tr->add_option("--plan-budget", plan_budget)->check(CLI::NonNegativeNumber);
  tr->add_option("--seed", seed);
  tr->add_option("--w", w)->check(CLI::NonNegativeNumber);
  tr->add_option("--lambda", lambda)->check(CLI::NonNegativeNumber);
  tr->add_flag("--grid-search-lambda", grid_lambda);
  tr->add_option("--action-scale", action_scale_text, "e.g. 0,0.1,0.2");
  tr->add_option("--epsilon", epsilon)->check(CLI::Range(0.0, 1.0));
  tr->add_option("--out", out_path, "output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "Run one planner over several seeds");
  ev->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  ev->add_option("--planner", planner)->required()->check(CLI::IsMember({"fd", "rev", "cov", "oo", "io", "mans"}));
  ev->add_option("--checkpoint", checkpoint_path);
  ev->add_option("--seeds", seeds_text);
  ev->add_option("--w", w)->check(CLI::NonNegativeNumber);
  ev->add_option("--workers", workers)->check(CLI::PositiveNumber);
  ev->add_option("--out", out_path, "output directory")->required();

  auto* cmp = app.add_subcommand("compare", "Comparison table across planners");
  cmp->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  cmp->add_option("--planners", planners_text);
  cmp->add_option("--checkpoint", checkpoint_path);
  cmp->add_option("--seeds", seeds_text);
  cmp->add_option("--w", w)->check(CLI::NonNegativeNumber);
  cmp->add_option("--reference", reference);
  cmp->add_option("--workers", workers)->check(CLI::PositiveNumber);
  cmp->add_option("--out", out_path, "output directory")->required();

  auto* sw = app.add_subcommand("sweep", "Train and evaluate over a parameter grid");
  sw->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  sw->add_option("--parameter", parameter)->required()->check(CLI::IsMember({"w", "action_scale"}));
  sw->add_option("--values", values_text, "w: 9/1,7/3,1; action_scale: 0,0.1,0.2;0,0.2,0.4 or 'standard'");
  sw->add_option("--seeds", seeds_text);
  sw->add_option("--config", config_path)->check(CLI::ExistingFile);
  sw->add_option("--plan-budget", plan_budget)->check(CLI::NonNegativeNumber);
  sw->add_option("--workers", workers)->check(CLI::PositiveNumber);
  sw->add_option("--w", w)->check(CLI::NonNegativeNumber);
  sw->add_option("--out", out_path, "output directory")->required();

  auto* rd = app.add_subcommand("report-daily", "Per-day CSV from a report");
  rd->add_option("--report", report_path)->required()->check(CLI::ExistingFile);
  rd->add_option("--out", out_path, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  const LogSink log = [&err](const std::string& line) { err << line << std::endl; };

  try {
    CLI::App* cmd = app.get_subcommands().front();
    Run run(cmd->get_name(), argc, argv);
    nlohmann::json cfg = nlohmann::json::object();
    if (!config_path.empty()) {
      cfg = parse_json_file(config_path);
      run.manifest.config_hash = hash_file(config_path);
    }
    if (!scenario_path.empty()) run.manifest.scenario_hash = hash_file(scenario_path);

    if (cmd == gen) {
      const ScenarioConfig sc_cfg = ScenarioConfig::from_json(cfg.contains("scenario") ? cfg.at("scenario") : cfg);
      const Scenario sc = generate_scenario(sc_cfg, seed);
      run.dir = parent_dir(out_path);
      ensure_dir(run.dir);
      save_scenario(sc, out_path);
      run.manifest.seeds = {seed};
      run.manifest.scenario_hash = hash_file(out_path);
      run.finish();
      out << "wrote " << out_path << " (" << sc.pool.size() << " stations, " << sc.pool.pois.size() << " POIs)\n";
      return 0;
    }

    if (cmd == rd) {
      const EpisodeReport report = report_from_json(parse_json_file(report_path));
      run.dir = parent_dir(out_path);
      write_text(out_path, daily_csv(report));
      run.finish();
      return 0;
    }

    const Scenario sc = load_scenario(scenario_path);

    if (cmd == sim) {
      const DeploymentPlan plan = load_plan(plan_path, sc);
      EpisodeOptions eo;
      eo.w = w;
      const EpisodeResult r = run_episode(sc, plan, seed, eo);
      run.dir = parent_dir(out_path);
      write_text(out_path, report_json(r.report).dump(2) + "\n");
      run.manifest.seeds = {seed};
      run.finish();
      out << "objective " << r.report.episode.objective << ", infeasible days " << r.report.episode.infeasible_days
          << "\n";
      return 0;
    }

    if (cmd == tr) {
      TrainConfig tc = TrainConfig::from_json(cfg.value("train", nlohmann::json::object()));
      if (tr->count("--seed")) tc.seed = seed;
      if (tr->count("--w")) tc.w = w;
      if (workers > 0) tc.workers = workers;
      if (plan_budget >= 0) tc.plan_budget = plan_budget;
      if (lambda >= 0) tc.lambda = lambda;
      if (epsilon >= 0) tc.epsilon = epsilon;
      ModelSection ms = model_section(cfg, tc.seed);
      if (!action_scale_text.empty()) ms.model.action_scale = parse_scale(action_scale_text);

      run.dir = out_path;
      const fs::path ckdir = run.dir / "checkpoints";
      ensure_dir(ckdir);
      log("building model (partition, demand predictor, observation statistics)");
      const MansModel model = build_model(sc, ms.model);

      if (grid_lambda) {
        const double scale = lambda_scale(sc, model.partition, derive_seed(tc.seed, 0x1a));
        const LambdaSearch ls = grid_search_lambda(sc, model, tc, {0.5 * scale, scale, 2 * scale}, ms.eval_seeds, log);
        std::string csv = "lambda,objective,infeasible_days\n";
        for (const auto& t : ls.trials) {
          char buf[128];
          std::snprintf(buf, sizeof buf, "%.10g,%.10g,%d\n", t.lambda, t.objective, t.infeasible_days);
          csv += buf;
        }
        write_text(run.dir / "lambda_search.csv", csv);
        tc.lambda = ls.best;
        log("selected lambda " + std::to_string(ls.best));
      }

      nlohmann::json effective = cfg;
      effective["train"] = tc.to_json();
      write_text(run.dir / "effective_config.json", effective.dump(2) + "\n");

      std::string curve = std::string(kCurveHeader) + "\n";
      const fs::path curve_path = run.dir / "learning_curve.csv";
      write_text(curve_path, curve);
      const nlohmann::json meta = {{"train", tc.to_json()}, {"scenario_hash", run.manifest.scenario_hash}};
      const TrainResult result = train(
          sc, model, tc,
          [&](const MansModel& m, const std::string& tag) {
            save_checkpoint(m, (ckdir / (tag + ".json")).string(), meta);
          },
          [&](const CurveRow& row) {
            curve += curve_csv_row(row) + "\n";
            write_file_atomic(curve_path.string(), curve);
          },
          log);
      run.manifest.seeds = {tc.seed};
      run.finish();
      out << "updates " << result.updates << ", best batch objective " << result.best_objective << "\n";
      return 0;
    }

    const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
    run.manifest.seeds = seeds;
    run.dir = out_path;

    if (cmd == ev) {
      std::optional<MansModel> model;
      if (planner == "mans") {
        if (checkpoint_path.empty()) throw ValidationError("--planner mans needs --checkpoint");
        model = load_checkpoint(sc, checkpoint_path);
        run.manifest.config_hash = hash_file(checkpoint_path);
      }
      const auto runs = evaluate_planner(sc, planner, seeds, w, model ? &*model : nullptr, workers);
      for (std::size_t k = 0; k < runs.size(); ++k) {
        const std::string stem = planner + "_seed" + std::to_string(seeds[k]);
        write_text(run.dir / (stem + ".json"), report_json(runs[k].report).dump(2) + "\n");
        write_text(run.dir / (stem + "_plan.json"), plan_json(runs[k].plan).dump() + "\n");
      }
      std::vector<ComparisonRow> rows{summarize_runs(planner, runs)};
      write_text(run.dir / "summary.json", comparison_json(rows, planner).dump(2) + "\n");
      run.finish();
      out << comparison_csv(rows);
      return 0;
    }

    if (cmd == cmp) {
      std::optional<MansModel> model;
      std::vector<ComparisonRow> rows;
      for (const std::string& p : split(planners_text, ',')) {
        if (p == "mans") {
          if (checkpoint_path.empty() || !fs::exists(checkpoint_path)) {
            err << "notice: skipping mans, no checkpoint"
                << (checkpoint_path.empty() ? std::string() : " at " + checkpoint_path) << "\n";
            continue;
          }
          model = load_checkpoint(sc, checkpoint_path);
          run.manifest.config_hash = hash_file(checkpoint_path);
        }
        log("evaluating " + p);
        rows.push_back(summarize_runs(p, evaluate_planner(sc, p, seeds, w, model ? &*model : nullptr, workers)));
      }
      fill_deltas(rows, reference);
      write_text(run.dir / "comparison.csv", comparison_csv(rows));
      write_text(run.dir / "comparison.json", comparison_json(rows, reference).dump(2) + "\n");
      run.finish();
      out << comparison_csv(rows);
      return 0;
    }

    if (cmd == sw) {
      SweepOptions so;
      so.train = TrainConfig::from_json(cfg.value("train", nlohmann::json::object()));
      if (workers > 0) so.train.workers = workers;
      if (plan_budget >= 0) so.train.plan_budget = plan_budget;
      if (sw->count("--w")) so.train.w = w;
      so.model = model_section(cfg, so.train.seed).model;
      so.seeds = seeds;
      std::vector<SweepRow> rows;
      if (parameter == "w") {
        rows = sweep_w(sc, parse_values(values_text.empty() ? "9/1,7/3,1,3/7,1/9" : values_text), so, log);
      } else {
        std::vector<std::vector<double>> scales;
        if (values_text.empty() || values_text == "standard")
          scales = standard_action_scales();
        else
          for (const std::string& s : split(values_text, ';')) scales.push_back(parse_scale(s));
        rows = sweep_action_scale(sc, scales, so, log);
      }
      write_text(run.dir / "sweep.csv", sweep_csv(rows));
      run.finish();
      out << "wrote " << rows.size() << " rows\n";
      return 0;
    }
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace emob
