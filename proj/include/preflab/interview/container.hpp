#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/interview/themes.hpp"

namespace preflab::interview {

struct QaTurn {
  std::string question;
  std::optional<std::string> answer;
  bool operator==(const QaTurn&) const = default;
};

struct AnalysisEntry {
  int response_index = 0;  ///< 0-based index into history
  std::string summary;
  std::string insights_hypotheses;
  std::vector<std::string> points_closed;
  std::vector<std::string> points_added;
  bool degraded = false;
  std::string error;
  bool operator==(const AnalysisEntry&) const = default;
};

struct SummaryComment {
  std::string text;
  ThemeName theme = ThemeName::PreferenceTargets;
  bool operator==(const SummaryComment&) const = default;
};

/// Shared interview state. A question is pending when the last turn has no
/// answer. `finalized` is set once the interview is closed; the summary is
/// then present unless its generation failed (summary_pending).
struct InterviewDataContainer {
  std::string participant_id;
  Theme theme;
  std::vector<std::string> points_to_cover;
  std::vector<QaTurn> history;
  std::vector<AnalysisEntry> analyses;
  std::optional<SummaryComment> summary;
  bool finalized = false;
  bool partial = false;
  bool summary_pending = false;

  int questions_asked() const { return static_cast<int>(history.size()); }
  int answers_given() const;
  int remaining_questions() const { return theme.question_budget - questions_asked(); }
  bool question_pending() const { return !history.empty() && !history.back().answer; }

  /// Throws std::logic_error if the ordering invariants are broken.
  void check_invariants() const;

  bool operator==(const InterviewDataContainer&) const = default;
};

/// Applies one analysis to an open-point list: closed labels are removed
/// (case-insensitive), added points appended unless already present.
void apply_points_update(std::vector<std::string>& points, const AnalysisEntry& entry);

nlohmann::json to_json(const InterviewDataContainer& c);
InterviewDataContainer container_from_json(const nlohmann::json& j);

}  // namespace preflab::interview
