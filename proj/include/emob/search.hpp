#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "emob/metrics.hpp"
#include "emob/policy.hpp"
#include "emob/predictor.hpp"
#include "emob/regions.hpp"
#include "emob/simulator.hpp"

namespace emob {

struct ScoredCandidate {
  StationId id = 0;
  double score = 0;
};

/// score = alpha * (POI contribution / sum of the region's contributions)
///       + (1 - alpha) * (predicted pick-ups / region total).
/// A member's POI contribution counts the region's POIs it alone covers among
/// active members (if active) or would newly cover (if inactive). Sorted by
/// descending score, ties by id.
std::vector<ScoredCandidate> score_candidates(const CandidatePool& pool, const std::vector<StationId>& members,
                                              const std::vector<int>& region_pois,
                                              const std::vector<std::uint8_t>& active,
                                              const std::vector<double>& predicted, double alpha = 0.5);

struct LowLevelChoice {
  std::vector<StationId> open;
  std::vector<StationId> close;
};

/// Opens up to n_open inactive candidates walking down the ranking and closes
/// up to n_close active ones walking up from the bottom; each pick takes the
/// next in line with probability 1 - epsilon, otherwise a uniformly random
/// remaining candidate. One uniform draw per pick, plus one index draw when
/// exploring.
LowLevelChoice low_level_select(const std::vector<StationId>& ranking, int n_open, int n_close, double epsilon,
                                Rng& rng, const std::vector<std::uint8_t>& active);

/// Stations implied by a level: round(scale * M), clipped to what is available.
int level_count(const std::vector<double>& action_scale, int level, int region_size, int available);

inline constexpr int kCandidateFeatures = 10;
inline constexpr int kContextFeatures = 6;
inline constexpr int kGlobalFeatures = 2 * kCandidateFeatures;
inline int observation_size(int region_size) {
  return region_size * kCandidateFeatures + kContextFeatures + kGlobalFeatures;
}

/// z-scores with statistics pooled per feature kind (a candidate feature
/// shares one mean/std across all rank slots).
struct ObsNormalizer {
  std::vector<double> mean;
  std::vector<double> std;

  static ObsNormalizer identity(int dim);
  static ObsNormalizer fit(const std::vector<Eigen::VectorXd>& raw, int region_size);
  Eigen::VectorXd apply(const Eigen::VectorXd& raw) const;
};

struct MansModel {
  RegionPartition partition;
  DemandPredictor predictor;
  ObsNormalizer normalizer;
  PolicyNet net;
  std::vector<double> theta;
  std::vector<double> action_scale{0.0, 0.1, 0.2};
  double alpha = 0.5;
};

struct SearchConfig {
  double epsilon = 0.1;
  bool sample = true;  // sample levels; false takes the most likely ones
  RewardConfig reward;
};

struct RegionStep {
  Eigen::VectorXd obs;  // normalised
  int add_level = 0;
  int remove_level = 0;
  double log_prob = 0;
  double value = 0;
  double reward = 0;
};

struct Trajectory {
  std::vector<std::vector<RegionStep>> regions;  // [region][day - 1]
};

struct RegionRawView {
  std::vector<StationId> ranking;
  Eigen::VectorXd raw;
};

/// Raw (unnormalised) observations for every region on `ctx.day`, candidates
/// laid out in ranking order.
std::vector<RegionRawView> build_observations(const MansModel& model, const PlanningContext& ctx,
                                              const DemandForecast& forecast);

class MansPlanner final : public Planner {
 public:
  MansPlanner(const MansModel& model, SearchConfig config, Trajectory* record = nullptr);

  std::vector<StationId> plan_day(PlanningContext& ctx) override;
  void after_day(PlanningContext& ctx, const DayRecord& record) override;

 private:
  const MansModel& model_;
  SearchConfig config_;
  Trajectory* record_;
  std::vector<LstmState> states_;
};

struct GeneratedPlan {
  EpisodeResult episode;
  Trajectory trajectory;
};

GeneratedPlan generate_plan(const MansModel& model, const Scenario& scenario, std::uint64_t seed,
                            const SearchConfig& config);

struct ModelOptions {
  std::uint64_t seed = 1;
  std::vector<double> action_scale{0.0, 0.1, 0.2};
  double alpha = 0.5;
  int hidden = 64;
  PredictorKind predictor = PredictorKind::Gcn;
  int predictor_episodes = 8;
  int normalizer_episodes = 4;
};

/// Partition, pre-trained demand predictor, frozen observation statistics and
/// freshly initialised policy weights.
MansModel build_model(const Scenario& scenario, const ModelOptions& options = {});

}  // namespace emob
