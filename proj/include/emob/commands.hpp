#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace emob {

/// Written as manifest.json next to every command's output.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_hash;
  std::string scenario_hash;
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::string started_utc;
  std::string finished_utc;

  nlohmann::json to_json() const;
};

std::string version_string();
std::string hash_file(const std::string& path);

/// Entry point of the emobsim tool. Returns 0 on success, 2 on invalid input
/// (bad arguments, malformed files, failed validation) and 1 otherwise.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emob
