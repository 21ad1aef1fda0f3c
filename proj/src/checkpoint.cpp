#include "emob/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace emob {

nlohmann::json checkpoint_json(const MansModel& m, const nlohmann::json& meta) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : m.partition.regions) regions.push_back(r.members);
  const PolicyShape& sh = m.net.shape();
  return {{"format", kCheckpointFormat},
          {"meta", meta},
          {"shape", {{"obs_dim", sh.obs_dim}, {"hidden", sh.hidden}, {"head_hidden", sh.head_hidden}, {"levels", sh.levels}}},
          {"action_scale", m.action_scale},
          {"alpha", m.alpha},
          {"partition", {{"seed", m.partition.seed}, {"region_size", m.partition.region_size}, {"regions", regions}}},
          {"normalizer", {{"mean", m.normalizer.mean}, {"std", m.normalizer.std}}},
          {"predictor", m.predictor.to_json()},
          {"theta", m.theta}};
}

MansModel model_from_json(const Scenario& sc, const nlohmann::json& j) {
  if (j.value("format", "") != kCheckpointFormat) throw ValidationError("not a checkpoint file");
  MansModel m;
  const auto& sh = j.at("shape");
  PolicyShape shape;
  shape.obs_dim = sh.at("obs_dim").get<int>();
  shape.hidden = sh.at("hidden").get<int>();
  shape.head_hidden = sh.at("head_hidden").get<int>();
  shape.levels = sh.at("levels").get<int>();
  m.net = PolicyNet(shape);
  m.theta = j.at("theta").get<std::vector<double>>();
  if (m.theta.size() != m.net.size()) throw ValidationError("checkpoint weights do not match the declared shape");
  m.action_scale = j.at("action_scale").get<std::vector<double>>();
  if (static_cast<int>(m.action_scale.size()) != shape.levels)
    throw ValidationError("checkpoint action scale does not match the policy head");
  m.alpha = j.at("alpha").get<double>();

  const auto& p = j.at("partition");
  const int M = p.at("region_size").get<int>();
  if (M != sc.region_size || observation_size(M) != shape.obs_dim)
    throw ValidationError("checkpoint region size does not match the scenario");
  // Rebuild from the seed, then make sure the stored membership agrees.
  m.partition = partition_regions(sc.pool, M, p.at("seed").get<std::uint64_t>());
  const auto& stored = p.at("regions");
  if (stored.size() != m.partition.regions.size()) throw ValidationError("checkpoint partition does not match");
  for (std::size_t r = 0; r < stored.size(); ++r)
    if (stored[r].get<std::vector<StationId>>() != m.partition.regions[r].members)
      throw ValidationError("checkpoint partition does not match the scenario");

  m.normalizer.mean = j.at("normalizer").at("mean").get<std::vector<double>>();
  m.normalizer.std = j.at("normalizer").at("std").get<std::vector<double>>();
  if (static_cast<int>(m.normalizer.mean.size()) != shape.obs_dim)
    throw ValidationError("checkpoint normalizer size mismatch");
  m.predictor.load_json(sc, j.at("predictor"));
  return m;
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

void save_checkpoint(const MansModel& model, const std::string& path, const nlohmann::json& meta) {
  write_file_atomic(path, checkpoint_json(model, meta).dump() + "\n");
}

MansModel load_checkpoint(const Scenario& sc, const std::string& path, nlohmann::json* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed checkpoint " + path + ": " + e.what());
  }
  if (meta) *meta = j.value("meta", nlohmann::json::object());
  return model_from_json(sc, j);
}

}  // namespace emob
