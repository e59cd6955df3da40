#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "preflab/core/dataset.hpp"

namespace preflab {

/// Per-image scores of one predictor, typically read from a score file.
///
/// The file format is line-delimited JSON: the first record is a header
/// {"predictor_name", "provenance"} and every following record is
/// {"image_id", "score"}. Optional extensions used for multi-participant
/// evaluation: header "participant", "kind" ("model" | "human"), "rater"
/// (the participant id of a human predictor), and a per-line "participant"
/// overriding the header.
struct PredictorScores {
  std::string predictor_name;
  std::string provenance;
  std::string kind = "model";
  std::string rater;
  /// participant -> image_id -> score. Single-participant files use the
  /// header participant, or "default".
  std::map<std::string, std::map<std::string, double>> by_participant;

  /// Scores of the only (or the named) participant.
  const std::map<std::string, double>& scores(const std::string& participant = {}) const;

  /// Throws DataError naming the first id absent from dataset.
  void validate_against(const Dataset& dataset, const std::string& participant = {}) const;

  bool operator==(const PredictorScores&) const = default;
};

inline constexpr const char* kDefaultParticipant = "default";

PredictorScores read_predictor_scores(std::istream& in);
PredictorScores read_predictor_scores_file(const std::string& path);
void write_predictor_scores(const PredictorScores& scores, std::ostream& out);

}  // namespace preflab
