#include "preflab/interview/session.hpp"

#include <algorithm>

#include "preflab/interview/archive.hpp"

namespace preflab::interview {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

nlohmann::json analysis_json(const AnalysisEntry& a) {
  return {{"response_index", a.response_index}, {"summary", a.summary},
          {"insights_hypotheses", a.insights_hypotheses}, {"points_closed", a.points_closed},
          {"points_added", a.points_added}, {"degraded", a.degraded}};
}

}  // namespace

InterviewSession::InterviewSession(std::string id, std::string participant_id, Theme theme, llm::Gateway& gateway,
                                   SessionOptions options)
    : id_(std::move(id)), gateway_(gateway), options_(std::move(options)) {
  validate_participant_id(participant_id);
  if (theme.question_budget < 1) throw ValidationError("question budget must be >= 1");
  if (options_.analysis_lag < 0) throw ValidationError("analysis_lag must be >= 0");
  container_.participant_id = std::move(participant_id);
  container_.theme = std::move(theme);
  for (const auto& s : container_.theme.sub_topics) container_.points_to_cover.push_back(s.label);
  initial_points_ = container_.points_to_cover;
  worker_ = std::thread([this] { worker_loop(); });
}

InterviewSession::~InterviewSession() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void InterviewSession::post(std::string type, nlohmann::json data) {
  events_.push_back({events_.size(), std::move(type), std::move(data)});
  cv_.notify_all();
}

void InterviewSession::worker_loop() {
  for (;;) {
    int turn = 0;
    InterviewDataContainer view;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return stop_ || !queue_.empty(); });
      if (stop_) return;
      turn = queue_.front();
      queue_.pop_front();
      view = container_;
      view.history.resize(static_cast<std::size_t>(turn) + 1);
    }
    AnalysisEntry entry;
    try {
      const auto resp = gateway_.complete_with_fallback(analyzer_request(view, turn, options_.templates));
      entry = parse_analysis(resp.text, turn);
    } catch (const std::exception& e) {
      entry = AnalysisEntry{};
      entry.response_index = turn;
      entry.degraded = true;
      entry.error = e.what();
    }
    std::lock_guard lk(mu_);
    container_.analyses.push_back(entry);
    apply_points_update(container_.points_to_cover, entry);
    post("analysis", analysis_json(entry));
  }
}

std::string InterviewSession::issue_question() {
  InterviewDataContainer view;
  {
    std::unique_lock lk(mu_);
    if (container_.finalized) throw SessionError("session finalized");
    if (container_.question_pending()) throw SessionError("a question is already pending");
    if (container_.remaining_questions() <= 0) throw SessionError("question budget exhausted");
    const int asked = container_.questions_asked();
    const auto visible = static_cast<std::size_t>(std::max(0, asked - options_.analysis_lag));
    cv_.wait(lk, [&] { return stop_ || container_.analyses.size() >= visible; });
    if (stop_) throw SessionError("session closed");
    view = container_;
    view.analyses.resize(visible);
    view.points_to_cover = initial_points_;
    for (const auto& a : view.analyses) apply_points_update(view.points_to_cover, a);
  }
  const auto resp = gateway_.complete_with_fallback(interviewer_request(view, options_.templates));
  std::string question = trim(resp.text);
  if (question.empty()) throw llm::LlmError(llm::ErrorKind::Provider, "interviewer returned an empty question");
  std::lock_guard lk(mu_);
  container_.history.push_back({question, std::nullopt});
  post("question", {{"index", container_.questions_asked() - 1},
                    {"text", question},
                    {"remaining_questions", container_.remaining_questions()}});
  return question;
}

std::string InterviewSession::start() {
  std::lock_guard op(op_mutex_);
  if (started_) throw SessionError("session already started");
  started_ = true;
  return issue_question();
}

SubmitResult InterviewSession::submit_answer(const std::string& text) {
  std::lock_guard op(op_mutex_);
  if (trim(text).empty()) throw ValidationError("answer text is empty");
  bool budget_spent = false;
  {
    std::lock_guard lk(mu_);
    if (container_.finalized) throw SessionError("session finalized");
    if (!container_.question_pending()) throw SessionError("no pending question");
    container_.history.back().answer = text;
    queue_.push_back(container_.questions_asked() - 1);
    budget_spent = container_.remaining_questions() == 0;
  }
  cv_.notify_all();
  if (budget_spent) {
    finalize_locked();
    return {std::nullopt, true};
  }
  return {issue_question(), false};
}

std::string InterviewSession::request_question() {
  std::lock_guard op(op_mutex_);
  return issue_question();
}

void InterviewSession::wait_for_analyses() const {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return stop_ || static_cast<int>(container_.analyses.size()) >= container_.answers_given(); });
}

void InterviewSession::finalize_locked() {
  wait_for_analyses();
  InterviewDataContainer view;
  {
    std::lock_guard lk(mu_);
    container_.partial = container_.answers_given() < container_.theme.question_budget;
    view = container_;
  }
  try {
    const auto resp = gateway_.complete_with_fallback(summary_request(view, options_.templates));
    const auto text = trim(resp.text);
    if (text.empty()) throw llm::LlmError(llm::ErrorKind::Provider, "empty summary");
    std::lock_guard lk(mu_);
    container_.summary = SummaryComment{text, container_.theme.name};
    container_.summary_pending = false;
    container_.finalized = true;
    post("summary", {{"text", text}, {"theme", to_string(container_.theme.name)}});
  } catch (const llm::LlmError& e) {
    std::lock_guard lk(mu_);
    container_.summary_pending = true;
    container_.finalized = true;
    post("summary_pending", {{"error", e.what()}});
  }
  {
    std::lock_guard lk(mu_);
    post("finalized", {{"partial", container_.partial}, {"summary_pending", container_.summary_pending}});
  }
  persist();
}

InterviewDataContainer InterviewSession::finalize() {
  std::lock_guard op(op_mutex_);
  {
    std::lock_guard lk(mu_);
    if (container_.finalized) throw SessionError("session finalized");
  }
  finalize_locked();
  return snapshot();
}

bool InterviewSession::retry_summary() {
  std::lock_guard op(op_mutex_);
  InterviewDataContainer view;
  {
    std::lock_guard lk(mu_);
    if (!container_.finalized) throw SessionError("session not finalized");
    if (!container_.summary_pending) return container_.summary.has_value();
    view = container_;
  }
  try {
    const auto resp = gateway_.complete_with_fallback(summary_request(view, options_.templates));
    const auto text = trim(resp.text);
    if (text.empty()) return false;
    {
      std::lock_guard lk(mu_);
      container_.summary = SummaryComment{text, container_.theme.name};
      container_.summary_pending = false;
      post("summary", {{"text", text}, {"theme", to_string(container_.theme.name)}});
    }
    persist();
    return true;
  } catch (const llm::LlmError&) {
    return false;
  }
}

InterviewDataContainer InterviewSession::snapshot() const {
  std::lock_guard lk(mu_);
  return container_;
}

bool InterviewSession::finalized() const {
  std::lock_guard lk(mu_);
  return container_.finalized;
}

std::vector<SessionEvent> InterviewSession::events_since(std::size_t from, std::chrono::milliseconds wait) const {
  std::unique_lock lk(mu_);
  cv_.wait_for(lk, wait, [&] { return stop_ || events_.size() > from; });
  if (from >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(from), events_.end()};
}

std::optional<std::filesystem::path> InterviewSession::archive_path() const {
  if (!options_.archive_root) return std::nullopt;
  std::lock_guard lk(mu_);
  return interview::archive_path(*options_.archive_root, container_.participant_id, container_.theme.name);
}

void InterviewSession::persist() {
  if (!options_.archive_root) return;
  write_archive(*options_.archive_root, snapshot());
}

InterviewDataContainer replay(const InterviewDataContainer& archived, llm::Gateway& gateway, SessionOptions options) {
  InterviewSession s("replay", archived.participant_id, archived.theme, gateway, std::move(options));
  s.start();
  for (const auto& turn : archived.history) {
    if (!turn.answer) break;
    if (s.submit_answer(*turn.answer).finalized) break;
  }
  if (archived.finalized && !s.finalized()) s.finalize();
  s.wait_for_analyses();
  return s.snapshot();
}

}  // namespace preflab::interview
