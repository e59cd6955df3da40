#include "preflab/interview/prompts.hpp"

#include <fstream>
#include <sstream>

namespace preflab::interview {

const PromptTemplates& english_templates() {
  static const PromptTemplates t = [] {
    PromptTemplates p;
    p.interviewer_system =
        "You are an interviewer learning what one person finds beautiful or unappealing in images. "
        "Ask one open question at a time. Follow up on what the person just said, look for what their "
        "preferences have in common, and make sure every sub-topic of the theme gets covered before the "
        "questions run out. Reply with the question only.";
    p.interviewer_user =
        "Theme: {{theme}}\n"
        "Sub-topics:\n{{sub_topics}}\n"
        "Open points to cover:\n{{points}}\n"
        "Remaining questions: {{remaining}}\n"
        "Conversation so far:\n{{history}}\n"
        "Analyst notes:\n{{analyses}}\n"
        "Write the next question.";
    p.analyzer_system =
        "You analyse interview answers about personal aesthetic preferences. Reply with one JSON object "
        "with keys summary (what the latest answer told us), insights_hypotheses (what it suggests about "
        "the person), points_closed (labels from the open-point list that are now covered) and "
        "points_added (new points worth probing).";
    p.analyzer_user =
        "Theme: {{theme}}\n"
        "Open points:\n{{points}}\n"
        "Earlier conversation:\n{{history}}\n"
        "Latest question: {{question}}\n"
        "Latest answer: {{answer}}\n"
        "Analyse the latest answer.";
    p.summary_system =
        "You write a short summary comment describing one person's aesthetic tendencies and traits, based "
        "on interview analyses.";
    p.summary_user =
        "Theme: {{theme}}\n"
        "Conversation:\n{{history}}\n"
        "Analyses:\n{{analyses}}\n"
        "Write the summary comment.";
    return p;
  }();
  return t;
}

PromptTemplates templates_from_json(const nlohmann::json& j) {
  PromptTemplates t = english_templates();
  auto take = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j.at(key).get<std::string>();
  };
  take("locale", t.locale);
  take("interviewer_system", t.interviewer_system);
  take("interviewer_user", t.interviewer_user);
  take("analyzer_system", t.analyzer_system);
  take("analyzer_user", t.analyzer_user);
  take("summary_system", t.summary_system);
  take("summary_user", t.summary_user);
  return t;
}

PromptTemplates load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read prompt templates " + path.string());
  return templates_from_json(nlohmann::json::parse(in));
}

std::string render(const std::string& text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(text, pos, open - pos);
    auto it = values.find(text.substr(open + 2, close - open - 2));
    if (it != values.end())
      out += it->second;
    else
      out.append(text, open, close + 2 - open);
    pos = close + 2;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

namespace {

std::string bullet_list(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (const auto& s : items) out += "- " + s + "\n";
  out.pop_back();
  return out;
}

std::string sub_topic_list(const Theme& theme) {
  std::string out;
  for (const auto& s : theme.sub_topics) out += "- " + s.label + ": " + s.guiding_question + "\n";
  if (!out.empty()) out.pop_back();
  return out;
}

std::string history_text(const std::vector<QaTurn>& history, std::size_t upto) {
  if (upto == 0) return "(none)";
  std::ostringstream os;
  for (std::size_t i = 0; i < upto && i < history.size(); ++i) {
    os << "Q" << i + 1 << ": " << history[i].question << "\n";
    os << "A" << i + 1 << ": " << (history[i].answer ? *history[i].answer : "(pending)");
    if (i + 1 < upto) os << "\n";
  }
  return os.str();
}

std::string analyses_text(const std::vector<AnalysisEntry>& analyses) {
  if (analyses.empty()) return "(none)";
  std::ostringstream os;
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    const auto& a = analyses[i];
    os << "[answer " << a.response_index + 1 << "]" << (a.degraded ? " (analysis unavailable)" : "") << " " << a.summary;
    if (!a.insights_hypotheses.empty()) os << " | " << a.insights_hypotheses;
    if (i + 1 < analyses.size()) os << "\n";
  }
  return os.str();
}

llm::ChatRequest make(llm::Role role, const std::string& system, const std::string& user) {
  llm::ChatRequest r;
  r.role = role;
  r.system_prompt = system;
  r.messages.push_back({"user", user});
  return r;
}

}  // namespace

llm::ChatRequest interviewer_request(const InterviewDataContainer& view, const PromptTemplates& t) {
  const std::map<std::string, std::string> values{
      {"theme", to_string(view.theme.name)},
      {"sub_topics", sub_topic_list(view.theme)},
      {"points", bullet_list(view.points_to_cover)},
      {"remaining", std::to_string(view.remaining_questions())},
      {"history", history_text(view.history, view.history.size())},
      {"analyses", analyses_text(view.analyses)},
  };
  return make(llm::Role::Interviewer, t.interviewer_system, render(t.interviewer_user, values));
}

llm::ChatRequest analyzer_request(const InterviewDataContainer& view, int turn, const PromptTemplates& t) {
  const auto& qa = view.history.at(static_cast<std::size_t>(turn));
  const std::map<std::string, std::string> values{
      {"theme", to_string(view.theme.name)},
      {"points", bullet_list(view.points_to_cover)},
      {"history", history_text(view.history, static_cast<std::size_t>(turn))},
      {"question", qa.question},
      {"answer", qa.answer.value_or("")},
  };
  return make(llm::Role::Analyzer, t.analyzer_system, render(t.analyzer_user, values));
}

llm::ChatRequest summary_request(const InterviewDataContainer& view, const PromptTemplates& t) {
  const std::map<std::string, std::string> values{
      {"theme", to_string(view.theme.name)},
      {"history", history_text(view.history, view.history.size())},
      {"analyses", analyses_text(view.analyses)},
  };
  return make(llm::Role::Interviewer, t.summary_system, render(t.summary_user, values));
}

namespace {
std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& v = j[key];
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v)
      if (e.is_string()) out.push_back(e.get<std::string>());
  }
  return out;
}
}  // namespace

AnalysisEntry parse_analysis(const std::string& reply, int turn) {
  AnalysisEntry e;
  e.response_index = turn;
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    const auto j = nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (j.is_object() && j.contains("summary") && j["summary"].is_string()) {
      e.summary = j["summary"].get<std::string>();
      if (j.contains("insights_hypotheses") && j["insights_hypotheses"].is_string())
        e.insights_hypotheses = j["insights_hypotheses"].get<std::string>();
      e.points_closed = string_list(j, "points_closed");
      e.points_added = string_list(j, "points_added");
      return e;
    }
  }
  e.summary = reply;
  return e;
}

}  // namespace preflab::interview
