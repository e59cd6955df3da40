#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "preflab/interview/session.hpp"
#include "preflab/util/httplib.hpp"

namespace preflab::interview {

struct ServiceOptions {
  SessionOptions session;
  /// Called once per session when it finalizes through the API.
  std::function<void(const InterviewDataContainer&)> on_finalized;
};

/// Session registry plus the HTTP routes:
///   POST /sessions                    {participant_id, theme} -> {session_id, question, remaining_questions}
///   POST /sessions/{id}/answers       {text} -> {next_question, remaining_questions} | {finalized: true, ...}
///   GET  /sessions/{id}               container snapshot
///   GET  /sessions/{id}/events        server-sent events (question, analysis, summary, finalized)
///   POST /sessions/{id}/finalize      early termination
///   POST /sessions/{id}/question      reissue after a failed question
///   POST /sessions/{id}/summary       retry a pending summary
class InterviewService {
public:
  InterviewService(llm::Gateway& gateway, ServiceOptions options = {});

  void mount(httplib::Server& server);

  std::shared_ptr<InterviewSession> create(const std::string& participant_id, ThemeName theme,
                                           std::string* first_question);
  std::shared_ptr<InterviewSession> find(const std::string& id) const;

private:
  void notify_finalized(const InterviewSession& s);

  llm::Gateway& gateway_;
  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<InterviewSession>> sessions_;
  std::size_t counter_ = 0;
};

}  // namespace preflab::interview
