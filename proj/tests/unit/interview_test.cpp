#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <set>
#include <thread>

#include "preflab/interview/archive.hpp"
#include "preflab/interview/server.hpp"
#include "preflab/interview/session.hpp"

using namespace preflab;
using namespace preflab::interview;

namespace {

std::string line_value(const std::string& text, const std::string& key) {
  const auto p = text.find(key);
  if (p == std::string::npos) return {};
  const auto e = text.find('\n', p);
  return text.substr(p + key.size(), e == std::string::npos ? std::string::npos : e - p - key.size());
}

// Replies are a pure function of the request: questions quote the remaining
// count, analyses echo the answer and close the first open point when the
// answer says "close".
std::optional<std::string> interview_oracle(const llm::ChatRequest& r, const llm::RoleConfig&) {
  const auto& text = r.messages.back().text;
  if (r.role == llm::Role::Interviewer) {
    if (text.find("Write the summary comment.") != std::string::npos)
      return "Enjoys calm scenes; " + std::to_string(std::count(text.begin(), text.end(), '[')) + " analyses.";
    return "Question with " + line_value(text, "Remaining questions: ") + " left?";
  }
  if (r.role == llm::Role::Analyzer) {
    const auto answer = line_value(text, "Latest answer: ");
    nlohmann::json j{{"summary", "said " + answer}, {"insights_hypotheses", "likes " + answer}, {"points_added", nlohmann::json::array()}};
    const auto points = text.substr(text.find("Open points:\n") + 13);
    if (answer.find("close") != std::string::npos && points.rfind("- ", 0) == 0)
      j["points_closed"] = {points.substr(2, points.find('\n') - 2)};
    else
      j["points_closed"] = nlohmann::json::array();
    if (answer.find("raise") != std::string::npos) j["points_added"] = {"Seasonal light"};
    return "Here you go:\n```json\n" + j.dump() + "\n```";
  }
  return std::nullopt;
}

// Mock wrapper that can fail per role and records every request.
class TestProvider : public llm::Provider {
public:
  explicit TestProvider(llm::MockOracle oracle = interview_oracle, std::vector<llm::ScriptRule> script = {})
      : mock_(std::move(script), std::move(oracle)) {}
  std::string name() const override { return "mock"; }
  llm::ChatResponse send(const llm::ChatRequest& r, const llm::RoleConfig& c) override {
    {
      std::lock_guard lk(mu);
      requests.push_back(r);
    }
    if (r.role == llm::Role::Analyzer && analyzer_delay.count() > 0) std::this_thread::sleep_for(analyzer_delay);
    if ((r.role == llm::Role::Analyzer && fail_analyzer) || (r.role == llm::Role::Interviewer && fail_interviewer))
      throw llm::LlmError(llm::ErrorKind::Transport, "down");
    if (r.role == llm::Role::Interviewer && fail_summary &&
        r.messages.back().text.find("Write the summary comment.") != std::string::npos)
      throw llm::LlmError(llm::ErrorKind::Timeout, "slow");
    return mock_.send(r, c);
  }
  std::vector<llm::ChatRequest> of_role(llm::Role role) {
    std::lock_guard lk(mu);
    std::vector<llm::ChatRequest> out;
    for (const auto& r : requests)
      if (r.role == role) out.push_back(r);
    return out;
  }
  std::atomic<bool> fail_analyzer{false}, fail_interviewer{false}, fail_summary{false};
  std::chrono::milliseconds analyzer_delay{0};
  std::mutex mu;
  std::vector<llm::ChatRequest> requests;

private:
  llm::MockProvider mock_;
};

struct Fixture {
  std::shared_ptr<TestProvider> provider = std::make_shared<TestProvider>();
  llm::Gateway gateway{llm::uniform_role_table("mock", "m"), [] {
                         llm::GatewayOptions o;
                         o.sleep = [](std::chrono::milliseconds) {};
                         return o;
                       }()};
  Fixture() { gateway.register_provider(provider); }
};

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("preflab_" + name);
  std::filesystem::remove_all(p);
  return p;
}

Theme tiny_theme(int budget) {
  Theme t = standard_theme(ThemeName::PersonalTastes);
  t.question_budget = budget;
  return t;
}

}  // namespace

TEST_SUITE("themes") {
  TEST_CASE("budgets and sub-topics") {
    CHECK(standard_theme(ThemeName::PreferenceTargets).question_budget == 15);
    CHECK(standard_theme(ThemeName::ImageEvokedReactions).question_budget == 10);
    CHECK(standard_theme(ThemeName::PersonalTastes).question_budget == 10);
    CHECK(standard_theme(ThemeName::PreferenceTargets).sub_topics.size() == 5);
    CHECK(standard_theme(ThemeName::ImageEvokedReactions).sub_topics.size() == 3);
    CHECK(standard_theme(ThemeName::PersonalTastes).sub_topics.size() == 2);
    std::vector<std::string> labels;
    for (const auto& s : standard_theme(ThemeName::PreferenceTargets).sub_topics) labels.push_back(s.label);
    CHECK(labels == std::vector<std::string>{"Subject", "Story", "Culture & History", "Art", "Daily Moments"});
    CHECK(standard_theme(ThemeName::ImageEvokedReactions).sub_topics[1].label == "Physical Reaction");
    CHECK(standard_theme(ThemeName::PersonalTastes).sub_topics[1].label == "Dislikes");
  }
  TEST_CASE("invalid theme name") {
    CHECK_THROWS_AS(parse_theme_name("Colours"), ValidationError);
    CHECK(parse_theme_name("ImageEvokedReactions") == ThemeName::ImageEvokedReactions);
  }
}

TEST_SUITE("prompts") {
  TEST_CASE("render substitutes known keys only") {
    CHECK(render("a {{x}} b {{y}}", {{"x", "1"}}) == "a 1 b {{y}}");
    CHECK(render("{{x}}{{x}}", {{"x", "ab"}}) == "abab");
  }
  TEST_CASE("analysis parsing") {
    auto e = parse_analysis(R"(noise {"summary":"s","insights_hypotheses":"i","points_closed":["Art"],"points_added":"New"} tail)", 2);
    CHECK(e.response_index == 2);
    CHECK(e.summary == "s");
    CHECK(e.points_closed == std::vector<std::string>{"Art"});
    CHECK(e.points_added == std::vector<std::string>{"New"});
    auto raw = parse_analysis("just prose", 0);
    CHECK(raw.summary == "just prose");
    CHECK(raw.points_closed.empty());
  }
  TEST_CASE("templates load overrides") {
    auto t = templates_from_json({{"locale", "ja"}, {"interviewer_system", "X"}});
    CHECK(t.locale == "ja");
    CHECK(t.interviewer_system == "X");
    CHECK(t.analyzer_system == english_templates().analyzer_system);
  }
}

TEST_SUITE("session") {
  TEST_CASE("PreferenceTargets starts with 14 remaining after question 1") {
    Fixture f;
    InterviewSession s("a", "P1", standard_theme(ThemeName::PreferenceTargets), f.gateway);
    CHECK(s.start() == "Question with 15 left?");
    const auto c = s.snapshot();
    CHECK(c.remaining_questions() == 14);
    CHECK(c.points_to_cover.size() == 5);
    InterviewSession r("b", "P1", standard_theme(ThemeName::ImageEvokedReactions), f.gateway);
    r.start();
    CHECK(r.snapshot().remaining_questions() == 9);
  }

  TEST_CASE("mock interviewer question equals the scripted reply") {
    auto provider = std::make_shared<TestProvider>(interview_oracle, std::vector<llm::ScriptRule>{{"Write the next question.", "What do you like?"}});
    llm::Gateway gw(llm::uniform_role_table("mock", "m"));
    gw.register_provider(provider);
    InterviewSession s("a", "P1", tiny_theme(3), gw);
    CHECK(s.start() == "What do you like?");
  }

  TEST_CASE("answer grows history; protocol errors") {
    Fixture f;
    InterviewSession s("a", "P1", tiny_theme(2), f.gateway);
    CHECK_THROWS_AS(s.submit_answer("early"), SessionError);  // nothing issued yet
    s.start();
    auto r = s.submit_answer("mountains");
    CHECK(s.snapshot().answers_given() == 1);
    CHECK(r.next_question.has_value());
    CHECK(s.snapshot().history.size() == 2);
    CHECK_THROWS_AS(s.start(), SessionError);
  }

  TEST_CASE("second submit without a new question reports no pending question") {
    Fixture f;
    InterviewSession s("a", "P1", tiny_theme(5), f.gateway);
    s.start();
    f.provider->fail_interviewer = true;
    CHECK_THROWS_AS(s.submit_answer("one"), llm::ExhaustedError);
    CHECK(s.snapshot().answers_given() == 1);
    try {
      s.submit_answer("two");
      FAIL("expected SessionError");
    } catch (const SessionError& e) {
      CHECK(std::string(e.what()) == "no pending question");
    }
    f.provider->fail_interviewer = false;
    CHECK_FALSE(s.request_question().empty());
    CHECK_NOTHROW(s.submit_answer("two"));
  }

  TEST_CASE("budget 1: question, then auto-finalize; later answers rejected") {
    Fixture f;
    auto dir = temp_dir("budget1");
    SessionOptions o;
    o.archive_root = dir;
    InterviewSession s("a", "P1", tiny_theme(1), f.gateway, o);
    s.start();
    auto r = s.submit_answer("quiet rooms");
    CHECK(r.finalized);
    CHECK_FALSE(r.next_question);
    auto c = s.snapshot();
    CHECK(c.finalized);
    CHECK(c.summary.has_value());
    CHECK_FALSE(c.partial);
    try {
      s.submit_answer("more");
      FAIL("expected SessionError");
    } catch (const SessionError& e) {
      CHECK(std::string(e.what()) == "session finalized");
    }
    CHECK(std::filesystem::exists(dir / "P1" / "PersonalTastes.json"));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("analysis entries carry summary and insights; closing a sub-topic shrinks the open points") {
    Fixture f;
    InterviewSession s("a", "P1", standard_theme(ThemeName::PreferenceTargets), f.gateway);
    s.start();
    s.submit_answer("I like dogs, close it");
    s.wait_for_analyses();
    auto c = s.snapshot();
    REQUIRE(c.analyses.size() == 1);
    CHECK(c.analyses[0].summary == "said I like dogs, close it");
    CHECK_FALSE(c.analyses[0].insights_hypotheses.empty());
    CHECK(c.analyses[0].points_closed == std::vector<std::string>{"Subject"});
    CHECK(c.points_to_cover.size() == 4);
    CHECK(std::find(c.points_to_cover.begin(), c.points_to_cover.end(), "Subject") == c.points_to_cover.end());
    s.submit_answer("raise something");
    s.wait_for_analyses();
    CHECK(s.snapshot().points_to_cover.back() == "Seasonal light");
  }

  TEST_CASE("failed analysis is degraded and the interview continues") {
    Fixture f;
    f.provider->fail_analyzer = true;
    InterviewSession s("a", "P1", tiny_theme(3), f.gateway);
    s.start();
    auto r = s.submit_answer("sunsets");
    CHECK(r.next_question);
    s.wait_for_analyses();
    auto c = s.snapshot();
    REQUIRE(c.analyses.size() == 1);
    CHECK(c.analyses[0].degraded);
    CHECK(c.analyses[0].error.find("down") != std::string::npos);
    f.provider->fail_analyzer = false;
    s.submit_answer("forests");
    s.wait_for_analyses();
    CHECK_FALSE(s.snapshot().analyses[1].degraded);
  }

  TEST_CASE("interviewer prompt states the remaining-question count") {
    Fixture f;
    InterviewSession s("a", "P1", standard_theme(ThemeName::PreferenceTargets), f.gateway);
    s.start();
    s.submit_answer("one");
    s.submit_answer("two");
    auto reqs = f.provider->of_role(llm::Role::Interviewer);
    REQUIRE(reqs.size() == 3);
    CHECK(reqs[0].messages[0].text.find("Remaining questions: 15") != std::string::npos);
    CHECK(reqs[1].messages[0].text.find("Remaining questions: 14") != std::string::npos);
    CHECK(reqs[2].messages[0].text.find("Remaining questions: 13") != std::string::npos);
  }

  TEST_CASE("interviewer sees exactly the analyses allowed by the lag") {
    for (int lag : {0, 1, 2}) {
      Fixture f;
      f.provider->analyzer_delay = std::chrono::milliseconds(5);
      SessionOptions o;
      o.analysis_lag = lag;
      InterviewSession s("a", "P1", tiny_theme(6), f.gateway, o);
      s.start();
      for (int i = 0; i < 4; ++i) s.submit_answer("answer " + std::to_string(i));
      auto reqs = f.provider->of_role(llm::Role::Interviewer);
      REQUIRE(reqs.size() == 5);
      for (int q = 0; q < 5; ++q) {
        const auto& text = reqs[q].messages[0].text;
        const int visible = std::max(0, q - lag);
        for (int k = 1; k <= 4; ++k) {
          const bool shown = text.find("[answer " + std::to_string(k) + "]") != std::string::npos;
          CHECK(shown == (k <= visible));
        }
      }
    }
  }

  TEST_CASE("full 15-question session archives 15 turns, 15 analyses and a summary") {
    Fixture f;
    auto dir = temp_dir("full15");
    SessionOptions o;
    o.archive_root = dir;
    InterviewSession s("a", "P7", standard_theme(ThemeName::PreferenceTargets), f.gateway, o);
    s.start();
    bool finalized = false;
    for (int i = 0; i < 15; ++i) finalized = s.submit_answer("answer " + std::to_string(i)).finalized;
    CHECK(finalized);
    auto a = read_archive(dir / "P7" / "PreferenceTargets.json");
    CHECK(a.history.size() == 15);
    CHECK(a.answers_given() == 15);
    CHECK(a.analyses.size() == 15);
    REQUIRE(a.summary.has_value());
    CHECK(a.summary->text == "Enjoys calm scenes; 15 analyses.");
    CHECK_FALSE(a.partial);
    CHECK(a.remaining_questions() == 0);
    CHECK(a == s.snapshot());
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("early termination at turn 3 is flagged partial") {
    Fixture f;
    auto dir = temp_dir("partial");
    SessionOptions o;
    o.archive_root = dir;
    InterviewSession s("a", "P2", standard_theme(ThemeName::PreferenceTargets), f.gateway, o);
    s.start();
    for (int i = 0; i < 3; ++i) s.submit_answer("x");
    auto c = s.finalize();
    CHECK(c.partial);
    CHECK(c.finalized);
    CHECK(c.analyses.size() == 3);
    CHECK(read_archive(dir / "P2" / "PreferenceTargets.json").partial);
    CHECK_THROWS_AS(s.finalize(), SessionError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("summary failure persists the transcript; retry fills the summary and clears the flag") {
    Fixture f;
    auto dir = temp_dir("pending");
    SessionOptions o;
    o.archive_root = dir;
    InterviewSession s("a", "P3", tiny_theme(2), f.gateway, o);
    s.start();
    s.submit_answer("one");
    f.provider->fail_summary = true;
    CHECK(s.submit_answer("two").finalized);
    auto a = read_archive(dir / "P3" / "PersonalTastes.json");
    CHECK(a.summary_pending);
    CHECK_FALSE(a.summary);
    CHECK(a.history.size() == 2);
    CHECK_FALSE(s.retry_summary());
    f.provider->fail_summary = false;
    CHECK(s.retry_summary());
    auto b = read_archive(dir / "P3" / "PersonalTastes.json");
    CHECK_FALSE(b.summary_pending);
    CHECK(b.summary.has_value());
    CHECK(s.retry_summary());  // idempotent once filled
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("committed snapshots always satisfy the ordering invariants") {
    Fixture f;
    f.provider->analyzer_delay = std::chrono::milliseconds(2);
    InterviewSession s("a", "P1", standard_theme(ThemeName::ImageEvokedReactions), f.gateway);
    std::atomic<bool> done{false};
    std::atomic<int> checked{0}, violations{0};
    std::thread watcher([&] {
      while (!done) {
        try {
          s.snapshot().check_invariants();
        } catch (const std::logic_error&) {
          ++violations;
        }
        ++checked;
      }
    });
    s.start();
    for (int i = 0; i < 10; ++i) s.submit_answer("a" + std::to_string(i));
    done = true;
    watcher.join();
    CHECK(violations == 0);
    CHECK(checked > 0);
  }

  TEST_CASE("replaying an archive through the mock reproduces the container") {
    for (int lag : {0, 1}) {
      Fixture f;
      f.provider->analyzer_delay = std::chrono::milliseconds(3);
      auto dir = temp_dir("replay");
      SessionOptions o;
      o.archive_root = dir;
      o.analysis_lag = lag;
      {
        InterviewSession s("a", "P5", standard_theme(ThemeName::ImageEvokedReactions), f.gateway, o);
        s.start();
        const std::vector<std::string> answers{"close this", "raise that", "plain", "close again", "x", "y", "close", "z", "w", "v"};
        for (const auto& a : answers) s.submit_answer(a);
      }
      auto archived = read_archive(dir / "P5" / "ImageEvokedReactions.json");
      Fixture g;  // fresh provider, no delay: timing differs, contents must not
      SessionOptions ro;
      ro.analysis_lag = lag;
      CHECK(replay(archived, g.gateway, ro) == archived);
      std::filesystem::remove_all(dir);
    }
  }

  TEST_CASE("invalid participant ids are rejected") {
    Fixture f;
    CHECK_THROWS_AS(InterviewSession("a", "../x", tiny_theme(2), f.gateway), ValidationError);
    CHECK_THROWS_AS(InterviewSession("a", "", tiny_theme(2), f.gateway), ValidationError);
  }

  TEST_CASE("container json round trip and digest") {
    Fixture f;
    InterviewSession s("a", "P1", tiny_theme(2), f.gateway);
    s.start();
    s.submit_answer("close one");
    s.submit_answer("two");
    auto c = s.snapshot();
    CHECK(container_from_json(nlohmann::json::parse(to_json(c).dump())) == c);
    auto d = interview_digest({c});
    CHECK(d.find("said close one") != std::string::npos);
    CHECK(d.find("Summary comment:") != std::string::npos);
  }
}

namespace {

struct ServerFixture {
  Fixture f;
  InterviewService service;
  httplib::Server server;
  int port = 0;
  std::thread thread;
  std::vector<InterviewDataContainer> finalized;
  std::mutex mu;

  explicit ServerFixture(const std::filesystem::path& archive)
      : service(f.gateway, [&] {
          ServiceOptions o;
          o.session.archive_root = archive;
          o.on_finalized = [this](const InterviewDataContainer& c) {
            std::lock_guard lk(mu);
            finalized.push_back(c);
          };
          return o;
        }()) {
    service.mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~ServerFixture() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

}  // namespace

TEST_SUITE("http api") {
  TEST_CASE("scripted 15-answer session over HTTP, with events and snapshot") {
    auto dir = temp_dir("http15");
    ServerFixture sf(dir);
    auto cli = sf.client();
    auto res = cli.Post("/sessions", R"({"participant_id":"P9","theme":"PreferenceTargets"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    auto body = nlohmann::json::parse(res->body);
    const std::string id = body["session_id"];
    CHECK(body["remaining_questions"] == 14);
    CHECK(body["question"] == "Question with 15 left?");

    // Event stream from a second client, collected until the stream closes.
    std::string sse;
    std::thread reader([&] {
      auto c = sf.client();
      c.set_read_timeout(std::chrono::seconds(20));
      c.Get("/sessions/" + id + "/events", [&](const char* data, std::size_t n) {
        sse.append(data, n);
        return true;
      });
    });

    nlohmann::json last;
    for (int i = 0; i < 15; ++i) {
      auto r = cli.Post("/sessions/" + id + "/answers", nlohmann::json{{"text", "answer " + std::to_string(i)}}.dump(),
                        "application/json");
      REQUIRE(r);
      REQUIRE(r->status == 200);
      last = nlohmann::json::parse(r->body);
      if (i < 14) CHECK(last.contains("next_question"));
    }
    CHECK(last["finalized"] == true);
    CHECK(last["summary"].is_string());
    reader.join();

    auto dup = cli.Post("/sessions/" + id + "/answers", R"({"text":"again"})", "application/json");
    CHECK(dup->status == 409);
    CHECK(nlohmann::json::parse(dup->body)["error"] == "session finalized");

    auto snap = cli.Get("/sessions/" + id);
    auto sj = nlohmann::json::parse(snap->body);
    CHECK(sj["history"].size() == 15);
    CHECK(sj["finalized"] == true);

    std::size_t questions = 0, pos = 0;
    while ((pos = sse.find("event: question\n", pos)) != std::string::npos) ++questions, ++pos;
    CHECK(questions == 15);
    CHECK(sse.find("event: summary\n") != std::string::npos);
    CHECK(sse.find("event: finalized\n") != std::string::npos);
    CHECK(sse.find("event: analysis\n") != std::string::npos);

    // Resume from the last seen id replays nothing new and closes.
    httplib::Headers h{{"Last-Event-ID", "1000"}};
    auto tail = cli.Get("/sessions/" + id + "/events", h);
    REQUIRE(tail);
    CHECK(tail->body.find("event:") == std::string::npos);

    CHECK(std::filesystem::exists(dir / "P9" / "PreferenceTargets.json"));
    CHECK(sf.finalized.size() == 1);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("error statuses") {
    auto dir = temp_dir("httperr");
    ServerFixture sf(dir);
    auto cli = sf.client();
    CHECK(cli.Post("/sessions", R"({"participant_id":"P1","theme":"Nope"})", "application/json")->status == 400);
    CHECK(cli.Post("/sessions", "not json", "application/json")->status == 400);
    CHECK(cli.Get("/sessions/none")->status == 404);
    CHECK(cli.Post("/sessions/none/answers", R"({"text":"x"})", "application/json")->status == 404);
    auto res = cli.Post("/sessions", R"({"participant_id":"P1","theme":"PersonalTastes"})", "application/json");
    const std::string id = nlohmann::json::parse(res->body)["session_id"];
    CHECK(cli.Post("/sessions/" + id + "/answers", R"({"text":""})", "application/json")->status == 400);
    sf.f.provider->fail_interviewer = true;
    CHECK(cli.Post("/sessions/" + id + "/answers", R"({"text":"x"})", "application/json")->status == 502);
    auto again = cli.Post("/sessions/" + id + "/answers", R"({"text":"y"})", "application/json");
    CHECK(again->status == 409);
    CHECK(nlohmann::json::parse(again->body)["error"] == "no pending question");
    sf.f.provider->fail_interviewer = false;
    CHECK(cli.Post("/sessions/" + id + "/question", "", "application/json")->status == 200);
    auto fin = cli.Post("/sessions/" + id + "/finalize", "", "application/json");
    CHECK(fin->status == 200);
    CHECK(nlohmann::json::parse(fin->body)["partial"] == true);
    std::filesystem::remove_all(dir);
  }
}
