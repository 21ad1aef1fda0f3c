#pragma once

#include <string>

#include <json.hpp>

#include "emob/search.hpp"

namespace emob {

inline constexpr const char* kCheckpointFormat = "emob-checkpoint/1";

/// Policy weights, action scale, observation statistics, demand predictor and
/// the region partition. Doubles are written shortest-round-trip, so
/// save -> load -> save reproduces the file byte for byte.
nlohmann::json checkpoint_json(const MansModel& model, const nlohmann::json& meta = nlohmann::json::object());
MansModel model_from_json(const Scenario& scenario, const nlohmann::json& j);

void save_checkpoint(const MansModel& model, const std::string& path,
                     const nlohmann::json& meta = nlohmann::json::object());
/// Throws ValidationError when the file does not match the scenario.
MansModel load_checkpoint(const Scenario& scenario, const std::string& path, nlohmann::json* meta = nullptr);

/// Writes `text` to `path` through a temporary file and a rename, so readers
/// never see a half-written file.
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace emob
