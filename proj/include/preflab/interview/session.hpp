#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "preflab/interview/container.hpp"
#include "preflab/interview/prompts.hpp"
#include "preflab/llm/gateway.hpp"

namespace preflab::interview {

/// Protocol violation by the client ("no pending question", "session finalized").
class SessionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SessionOptions {
  /// Question N+1 is generated once the analyses of answers up to N - lag
  /// are committed. 0 waits for the latest analysis; 1 lets the interviewer
  /// run alongside the analysis of the answer it follows up on.
  int analysis_lag = 1;
  PromptTemplates templates = english_templates();
  /// Archive root; the transcript goes to <root>/<participant>/<theme>.json.
  std::optional<std::filesystem::path> archive_root;
};

struct SessionEvent {
  std::size_t seq = 0;
  std::string type;  ///< question | analysis | summary | summary_pending | finalized
  nlohmann::json data;
};

struct SubmitResult {
  std::optional<std::string> next_question;
  bool finalized = false;
};

/// One interview on one theme. The analyzer runs on a background worker,
/// one answer at a time in turn order; every other operation happens on the
/// caller's thread. Client operations are serialized.
class InterviewSession {
public:
  InterviewSession(std::string id, std::string participant_id, Theme theme, llm::Gateway& gateway,
                   SessionOptions options = {});
  ~InterviewSession();
  InterviewSession(const InterviewSession&) = delete;
  InterviewSession& operator=(const InterviewSession&) = delete;

  const std::string& id() const { return id_; }

  /// Issues question 1. Throws llm::LlmError when the interviewer fails.
  std::string start();

  /// Records the answer, schedules its analysis, then either issues the
  /// next question or, with the budget spent, finalizes. If generating the
  /// next question fails the answer stays recorded and the error
  /// propagates; request_question() retries.
  SubmitResult submit_answer(const std::string& text);

  /// Issues the next question when none is pending (after a failed attempt).
  std::string request_question();

  /// Ends the interview now. Sessions ended before the budget is spent are
  /// marked partial. A summary failure leaves summary_pending set.
  InterviewDataContainer finalize();

  /// Regenerates a pending summary. Returns true if a summary is present
  /// afterwards.
  bool retry_summary();

  InterviewDataContainer snapshot() const;
  bool finalized() const;

  /// Blocks until all recorded answers have been analysed.
  void wait_for_analyses() const;

  /// Events with seq >= from, waiting up to `wait` for at least one.
  std::vector<SessionEvent> events_since(std::size_t from, std::chrono::milliseconds wait) const;

  std::optional<std::filesystem::path> archive_path() const;

private:
  void worker_loop();
  std::string issue_question();  // requires op_mutex_
  void finalize_locked();  // requires op_mutex_
  void post(std::string type, nlohmann::json data);  // requires mu_
  void persist();

  std::string id_;
  llm::Gateway& gateway_;
  SessionOptions options_;

  mutable std::mutex op_mutex_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  InterviewDataContainer container_;
  std::vector<std::string> initial_points_;
  std::vector<SessionEvent> events_;
  std::deque<int> queue_;
  bool stop_ = false;
  bool started_ = false;
  std::thread worker_;
};

/// Feeds an archived transcript's answers through a fresh session and
/// returns the resulting container once all analyses have landed.
InterviewDataContainer replay(const InterviewDataContainer& archived, llm::Gateway& gateway, SessionOptions options = {});

}  // namespace preflab::interview
