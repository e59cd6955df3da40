#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace preflab::app {

inline constexpr const char* kRunManifestFormat = "preflab-run/1";
inline constexpr const char* kRunManifestFile = "run_manifest.json";

struct StageRecord {
  std::string name;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  /// artifact name -> path relative to the artifacts directory
  std::map<std::string, std::string> artifacts;
  nlohmann::json details = nlohmann::json::object();
};

/// run_manifest.json in the artifacts directory. Each stage replaces its
/// own earlier record, so reruns keep one entry per stage.
struct RunManifest {
  std::string run_id;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<StageRecord> stages;

  /// Union of every stage's artifacts.
  std::map<std::string, std::string> artifacts() const;
  const StageRecord* stage(const std::string& name) const;
  void record(StageRecord stage);

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  /// Loads the manifest in `dir` or starts a new one; config and seed are
  /// refreshed to the values of the current invocation.
  static RunManifest open(const std::filesystem::path& dir, const nlohmann::json& config, std::uint64_t seed);
  void save(const std::filesystem::path& dir) const;
};

std::string utc_timestamp();

}  // namespace preflab::app
