#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "preflab/interview/container.hpp"
#include "preflab/llm/types.hpp"

namespace preflab::interview {

/// Editable prompt assets. Bodies use {{placeholder}} substitution; see
/// english_templates() for the available placeholders.
struct PromptTemplates {
  std::string locale = "en";
  std::string interviewer_system;
  std::string interviewer_user;
  std::string analyzer_system;
  std::string analyzer_user;
  std::string summary_system;
  std::string summary_user;
};

const PromptTemplates& english_templates();

/// Overrides english_templates() field by field from a JSON object.
PromptTemplates templates_from_json(const nlohmann::json& j);
PromptTemplates load_templates(const std::filesystem::path& path);

/// Replaces every {{key}}; unknown placeholders are left as they are.
std::string render(const std::string& text, const std::map<std::string, std::string>& values);

/// `view` is the snapshot the interviewer may see; the request states the
/// remaining-question count before this question is issued.
llm::ChatRequest interviewer_request(const InterviewDataContainer& view, const PromptTemplates& t);

/// Analysis of history[turn]; `view` holds the turns up to and including it.
llm::ChatRequest analyzer_request(const InterviewDataContainer& view, int turn, const PromptTemplates& t);

llm::ChatRequest summary_request(const InterviewDataContainer& view, const PromptTemplates& t);

/// Reads {summary, insights_hypotheses, points_closed, points_added} from
/// the first JSON object in the reply. Anything unparseable becomes the
/// summary verbatim.
AnalysisEntry parse_analysis(const std::string& reply, int turn);

}  // namespace preflab::interview
