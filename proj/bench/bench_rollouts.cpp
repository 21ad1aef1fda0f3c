// Times rollout collection: plain serial loop vs the OpenMP worker pool.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <omp.h>

#include "emob/scenario.hpp"
#include "emob/search.hpp"
#include "emob/trainer.hpp"

using namespace emob;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int rollouts = argc > 1 ? std::atoi(argv[1]) : 8;
  const int workers = argc > 2 ? std::atoi(argv[2]) : omp_get_num_procs();

  ScenarioConfig cfg;
  const Scenario sc = generate_scenario(cfg, 7);
  ModelOptions mo;
  mo.predictor_episodes = 2;
  mo.normalizer_episodes = 1;
  const MansModel model = build_model(sc, mo);
  SearchConfig search;

  std::vector<Rollout> a, b;
  const double ts = seconds([&] { a = collect_rollouts_serial(sc, model, search, 0, rollouts, 11); });
  const double tp = seconds([&] { b = collect_rollouts(sc, model, search, 0, rollouts, workers, 11); });

  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i)
    same = a[i].plan.episode.report.episode.objective == b[i].plan.episode.report.episode.objective;

  std::printf("rollouts %d, workers %d (effective %d), cores %d\n", rollouts, workers, effective_workers(workers),
              omp_get_num_procs());
  std::printf("serial   %.3f s  (%.3f s/rollout)\n", ts, ts / rollouts);
  std::printf("parallel %.3f s  (%.3f s/rollout)\n", tp, tp / rollouts);
  std::printf("speedup  %.2fx, outputs %s\n", ts / tp, same ? "identical" : "DIFFER");
  return same ? 0 : 1;
}
