#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "preflab/features/exploration.hpp"

namespace preflab::features {

inline constexpr const char* kFeatureSetFormat = "preflab-features/1";

/// The explore -> train handoff: both feature pools with their screening
/// statistics and the applicability matrix keyed by image id.
struct FeatureSet {
  ExplorationState state;
  ExplorationConfig config;
};

nlohmann::json feature_set_to_json(const ExplorationState& state, const ExplorationConfig& config);
/// Throws std::invalid_argument on a wrong format tag or broken invariants.
FeatureSet feature_set_from_json(const nlohmann::json& j);

void write_feature_set(const std::filesystem::path& path, const ExplorationState& state,
                       const ExplorationConfig& config);
FeatureSet read_feature_set(const std::filesystem::path& path);

}  // namespace preflab::features
