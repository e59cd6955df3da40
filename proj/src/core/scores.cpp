#include "preflab/core/scores.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace preflab {

using nlohmann::json;

const std::map<std::string, double>& PredictorScores::scores(const std::string& participant) const {
  if (participant.empty()) {
    if (by_participant.size() != 1)
      throw DataError("score file '" + predictor_name + "' holds " + std::to_string(by_participant.size()) +
                      " participants; name one");
    return by_participant.begin()->second;
  }
  auto it = by_participant.find(participant);
  if (it == by_participant.end())
    throw DataError("score file '" + predictor_name + "' has no participant '" + participant + "'");
  return it->second;
}

void PredictorScores::validate_against(const Dataset& dataset, const std::string& participant) const {
  for (const auto& [id, _] : scores(participant))
    if (!dataset.contains(id))
      throw DataError("score file '" + predictor_name + "' references unknown image_id '" + id + "'");
}

PredictorScores read_predictor_scores(std::istream& in) {
  PredictorScores out;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  std::string header_participant = kDefaultParticipant;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed record: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw DataError("record must be an object", line_no);
    if (!have_header) {
      if (!obj.contains("predictor_name") || !obj["predictor_name"].is_string())
        throw DataError("header must carry a string 'predictor_name'", line_no);
      out.predictor_name = obj["predictor_name"].get<std::string>();
      out.provenance = obj.value("provenance", std::string{});
      out.kind = obj.value("kind", std::string{"model"});
      if (out.kind != "model" && out.kind != "human")
        throw DataError("header 'kind' must be 'model' or 'human'", line_no);
      out.rater = obj.value("rater", std::string{});
      header_participant = obj.value("participant", std::string{kDefaultParticipant});
      have_header = true;
      continue;
    }
    if (!obj.contains("image_id") || !obj["image_id"].is_string())
      throw DataError("record must carry a string 'image_id'", line_no);
    if (!obj.contains("score") || !obj["score"].is_number())
      throw DataError("record must carry a numeric 'score'", line_no);
    const double score = obj["score"].get<double>();
    if (!std::isfinite(score)) throw DataError("non-finite score", line_no);
    const auto participant = obj.value("participant", header_participant);
    const auto id = obj["image_id"].get<std::string>();
    if (!out.by_participant[participant].emplace(id, score).second)
      throw DataError("duplicate image_id '" + id + "'", line_no);
  }
  if (!have_header) throw DataError("score file is missing its header record");
  if (out.by_participant.empty()) out.by_participant[header_participant];
  return out;
}

PredictorScores read_predictor_scores_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file '" + path + "'");
  return read_predictor_scores(in);
}

void write_predictor_scores(const PredictorScores& scores, std::ostream& out) {
  json header = {{"predictor_name", scores.predictor_name}, {"provenance", scores.provenance}};
  if (scores.kind != "model") header["kind"] = scores.kind;
  if (!scores.rater.empty()) header["rater"] = scores.rater;
  const bool single = scores.by_participant.size() == 1;
  if (single && scores.by_participant.begin()->first != kDefaultParticipant)
    header["participant"] = scores.by_participant.begin()->first;
  out << header.dump() << '\n';
  for (const auto& [participant, m] : scores.by_participant) {
    for (const auto& [id, score] : m) {
      json rec = {{"image_id", id}, {"score", score}};
      if (!single) rec["participant"] = participant;
      out << rec.dump() << '\n';
    }
  }
}

}  // namespace preflab
