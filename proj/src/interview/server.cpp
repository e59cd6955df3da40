#include "preflab/interview/server.hpp"

#include <cstdio>

namespace preflab::interview {

namespace {

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) { reply(res, status, {{"error", message}}); }

// Maps library exceptions onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const nlohmann::json::exception& e) {
    fail(res, 400, std::string("bad request body: ") + e.what());
  } catch (const ValidationError& e) {
    fail(res, 400, e.what());
  } catch (const SessionError& e) {
    fail(res, 409, e.what());
  } catch (const llm::ConfigError& e) {
    fail(res, 500, e.what());
  } catch (const llm::LlmError& e) {
    fail(res, 502, e.what());
  }
}

nlohmann::json snapshot_json(const InterviewSession& s) {
  auto j = to_json(s.snapshot());
  j["session_id"] = s.id();
  return j;
}

}  // namespace

InterviewService::InterviewService(llm::Gateway& gateway, ServiceOptions options)
    : gateway_(gateway), options_(std::move(options)) {}

std::shared_ptr<InterviewSession> InterviewService::create(const std::string& participant_id, ThemeName theme,
                                                           std::string* first_question) {
  std::string id;
  {
    std::lock_guard lk(mu_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%04zu", ++counter_);
    id = buf;
  }
  auto s = std::make_shared<InterviewSession>(id, participant_id, standard_theme(theme), gateway_, options_.session);
  auto q = s->start();
  if (first_question) *first_question = q;
  std::lock_guard lk(mu_);
  sessions_[id] = s;
  return s;
}

std::shared_ptr<InterviewSession> InterviewService::find(const std::string& id) const {
  std::lock_guard lk(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void InterviewService::notify_finalized(const InterviewSession& s) {
  if (options_.on_finalized) options_.on_finalized(s.snapshot());
}

void InterviewService::mount(httplib::Server& server) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type, Last-Event-ID"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"ok", true}}); });

  server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      const auto theme = parse_theme_name(body.at("theme").get<std::string>());
      std::string question;
      auto s = create(body.at("participant_id").get<std::string>(), theme, &question);
      reply(res, 201, {{"session_id", s->id()},
                       {"theme", to_string(theme)},
                       {"question", question},
                       {"remaining_questions", s->snapshot().remaining_questions()}});
    });
  });

  auto with_session = [this](const httplib::Request& req, httplib::Response& res) -> std::shared_ptr<InterviewSession> {
    auto s = find(req.matches[1]);
    if (!s) fail(res, 404, "unknown session " + std::string(req.matches[1]));
    return s;
  };

  server.Post(R"(/sessions/([^/]+)/answers)", [this, with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      const auto r = s->submit_answer(body.at("text").get<std::string>());
      if (r.finalized) {
        const auto c = s->snapshot();
        reply(res, 200, {{"finalized", true},
                         {"summary", c.summary ? nlohmann::json(c.summary->text) : nlohmann::json()},
                         {"summary_pending", c.summary_pending}});
        notify_finalized(*s);
      } else {
        reply(res, 200, {{"next_question", *r.next_question}, {"remaining_questions", s->snapshot().remaining_questions()}});
      }
    });
  });

  server.Get(R"(/sessions/([^/]+))", [with_session](const httplib::Request& req, httplib::Response& res) {
    if (auto s = with_session(req, res)) reply(res, 200, snapshot_json(*s));
  });

  server.Post(R"(/sessions/([^/]+)/finalize)", [this, with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    guarded(res, [&] {
      s->finalize();
      reply(res, 200, snapshot_json(*s));
      notify_finalized(*s);
    });
  });

  server.Post(R"(/sessions/([^/]+)/question)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    guarded(res, [&] {
      const auto q = s->request_question();
      reply(res, 200, {{"next_question", q}, {"remaining_questions", s->snapshot().remaining_questions()}});
    });
  });

  server.Post(R"(/sessions/([^/]+)/summary)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    guarded(res, [&] {
      const bool ok = s->retry_summary();
      reply(res, ok ? 200 : 502, snapshot_json(*s));
    });
  });

  server.Get(R"(/sessions/([^/]+)/events)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    std::size_t from = 0;
    if (req.has_header("Last-Event-ID")) from = std::stoul(req.get_header_value("Last-Event-ID")) + 1;
    else if (req.has_param("from")) from = std::stoul(req.get_param_value("from"));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [s, next = from](std::size_t, httplib::DataSink& sink) mutable {
      const auto events = s->events_since(next, std::chrono::milliseconds(500));
      if (events.empty()) {
        if (s->finalized()) {
          sink.done();
          return true;
        }
        static const std::string keepalive = ": keepalive\n\n";
        return sink.write(keepalive.data(), keepalive.size());
      }
      for (const auto& e : events) {
        const std::string frame =
            "id: " + std::to_string(e.seq) + "\nevent: " + e.type + "\ndata: " + e.data.dump() + "\n\n";
        if (!sink.write(frame.data(), frame.size())) return false;
        next = e.seq + 1;
      }
      return true;
    });
  });
}

}  // namespace preflab::interview
