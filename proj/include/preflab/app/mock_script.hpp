#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/features/candidates.hpp"
#include "preflab/llm/provider.hpp"

namespace preflab::app {

inline constexpr const char* kMockScriptFormat = "preflab-mock/1";

/// Offline stand-in for every LLM role. Rules are tried first (substring
/// match on the flattened prompt); then applicability prompts are answered
/// from the score table and generator prompts from the feature pool.
struct MockScript {
  std::vector<llm::ScriptRule> rules;
  /// feature name -> image id -> 0..4
  std::map<std::string, std::map<std::string, int>> applicability;
  int default_applicability = 0;
  std::vector<features::FeatureCandidate> pool;

  nlohmann::json to_json() const;
  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);

  std::optional<std::string> answer(const llm::ChatRequest& request) const;
  std::shared_ptr<llm::MockProvider> provider() const;
};

}  // namespace preflab::app
