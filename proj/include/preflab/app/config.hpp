#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "preflab/core/split.hpp"
#include "preflab/features/exploration.hpp"
#include "preflab/llm/types.hpp"
#include "preflab/trainer/grid.hpp"

namespace preflab::app {

struct ProviderSettings {
  std::string dialect = "openai";  ///< openai | anthropic
  std::string base_url;            ///< empty: taken from the environment
  double requests_per_minute = 0.0;
  double timeout_seconds = 120.0;
};

struct GatewaySettings {
  int max_attempts = 3;
  int backoff_ms = 1000;
  double backoff_factor = 2.0;
  std::map<std::string, ProviderSettings> providers;
};

struct EvaluationSettings {
  bool discretize = true;
  std::string alternative = "two-sided";
  bool include_giaa = false;
};

/// One layered document: {"seed", "split", "exploration", "training",
/// "roles", "gateway", "evaluation"}. Every section is optional.
struct AppConfig {
  std::uint64_t seed = 0;
  SplitOptions split;
  features::ExplorationConfig exploration;
  trainer::TrainingConfig training;
  llm::RoleTable roles;
  GatewaySettings gateway;
  EvaluationSettings evaluation;
  int workers = 4;

  /// Throws CommandError(kExitConfigError) on unknown keys or bad values.
  static AppConfig from_json(const nlohmann::json& j);
  /// Accepts a config file or a run manifest (its "config" snapshot).
  static AppConfig load(const std::filesystem::path& path);
  /// Never contains credentials.
  nlohmann::json to_json() const;
};

}  // namespace preflab::app
