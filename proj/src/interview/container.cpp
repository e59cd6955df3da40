#include "preflab/interview/container.hpp"

#include <algorithm>
#include <cctype>

namespace preflab::interview {

namespace {

std::string fold(const std::string& s) {
  std::string out;
  for (unsigned char c : s)
    if (!std::isspace(c)) out += static_cast<char>(std::tolower(c));
  return out;
}

nlohmann::json theme_json(const Theme& t) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : t.sub_topics) subs.push_back({{"label", s.label}, {"guiding_question", s.guiding_question}});
  return {{"name", to_string(t.name)}, {"sub_topics", subs}, {"question_budget", t.question_budget}};
}

Theme theme_from(const nlohmann::json& j) {
  Theme t;
  t.name = parse_theme_name(j.at("name").get<std::string>());
  for (const auto& s : j.at("sub_topics")) t.sub_topics.push_back({s.at("label"), s.at("guiding_question")});
  t.question_budget = j.at("question_budget").get<int>();
  return t;
}

}  // namespace

int InterviewDataContainer::answers_given() const {
  return static_cast<int>(std::count_if(history.begin(), history.end(), [](const QaTurn& t) { return t.answer.has_value(); }));
}

void InterviewDataContainer::check_invariants() const {
  const int q = questions_asked(), a = answers_given(), n = static_cast<int>(analyses.size());
  if (!(n <= a && a <= q && q <= theme.question_budget))
    throw std::logic_error("container counts out of order: analyses " + std::to_string(n) + ", answers " +
                           std::to_string(a) + ", questions " + std::to_string(q));
  for (std::size_t i = 0; i + 1 < history.size(); ++i)
    if (!history[i].answer) throw std::logic_error("unanswered question before the last turn");
  for (std::size_t i = 0; i < analyses.size(); ++i)
    if (analyses[i].response_index != static_cast<int>(i) || !history[i].answer)
      throw std::logic_error("analysis does not reference an answered turn");
  if (summary && !finalized) throw std::logic_error("summary present before finalization");
  if (finalized && !summary && !summary_pending) throw std::logic_error("finalized without summary");
}

void apply_points_update(std::vector<std::string>& points, const AnalysisEntry& entry) {
  for (const auto& closed : entry.points_closed) {
    const auto key = fold(closed);
    points.erase(std::remove_if(points.begin(), points.end(), [&](const std::string& p) { return fold(p) == key; }),
                 points.end());
  }
  for (const auto& added : entry.points_added) {
    if (fold(added).empty()) continue;
    const auto key = fold(added);
    if (std::none_of(points.begin(), points.end(), [&](const std::string& p) { return fold(p) == key; }))
      points.push_back(added);
  }
}

nlohmann::json to_json(const InterviewDataContainer& c) {
  using nlohmann::json;
  json history = json::array();
  for (const auto& t : c.history) history.push_back({{"question", t.question}, {"answer", t.answer ? json(*t.answer) : json()}});
  json analyses = json::array();
  for (const auto& a : c.analyses) {
    json e{{"response_index", a.response_index},         {"summary", a.summary},
           {"insights_hypotheses", a.insights_hypotheses}, {"points_closed", a.points_closed},
           {"points_added", a.points_added},               {"degraded", a.degraded}};
    if (!a.error.empty()) e["error"] = a.error;
    analyses.push_back(e);
  }
  return {{"participant_id", c.participant_id},
          {"theme", theme_json(c.theme)},
          {"points_to_cover", c.points_to_cover},
          {"history", history},
          {"analyses", analyses},
          {"summary", c.summary ? json{{"text", c.summary->text}, {"theme", to_string(c.summary->theme)}} : json()},
          {"remaining_questions", c.remaining_questions()},
          {"finalized", c.finalized},
          {"partial", c.partial},
          {"summary_pending", c.summary_pending}};
}

InterviewDataContainer container_from_json(const nlohmann::json& j) {
  InterviewDataContainer c;
  c.participant_id = j.at("participant_id").get<std::string>();
  c.theme = theme_from(j.at("theme"));
  c.points_to_cover = j.at("points_to_cover").get<std::vector<std::string>>();
  for (const auto& t : j.at("history")) {
    QaTurn turn{t.at("question").get<std::string>(), std::nullopt};
    if (!t.at("answer").is_null()) turn.answer = t["answer"].get<std::string>();
    c.history.push_back(turn);
  }
  for (const auto& a : j.at("analyses")) {
    AnalysisEntry e;
    e.response_index = a.at("response_index").get<int>();
    e.summary = a.at("summary").get<std::string>();
    e.insights_hypotheses = a.at("insights_hypotheses").get<std::string>();
    e.points_closed = a.at("points_closed").get<std::vector<std::string>>();
    e.points_added = a.at("points_added").get<std::vector<std::string>>();
    e.degraded = a.value("degraded", false);
    e.error = a.value("error", "");
    c.analyses.push_back(e);
  }
  if (!j.at("summary").is_null())
    c.summary = SummaryComment{j["summary"].at("text").get<std::string>(), parse_theme_name(j["summary"].at("theme"))};
  c.finalized = j.value("finalized", false);
  c.partial = j.value("partial", false);
  c.summary_pending = j.value("summary_pending", false);
  c.check_invariants();
  return c;
}

}  // namespace preflab::interview
