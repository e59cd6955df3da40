#include <doctest.h>

#include <future>
#include <sstream>
#include <thread>

#include "cli_harness.hpp"
#include "oracles.hpp"
#include "preflab/app/commands.hpp"
#include "preflab/app/config.hpp"
#include "preflab/app/errors.hpp"
#include "preflab/app/mock_script.hpp"
#include "preflab/app/run_manifest.hpp"
#include "preflab/app/synth.hpp"
#include "preflab/core/discretize.hpp"
#include "preflab/core/split.hpp"
#include "preflab/interview/archive.hpp"
#include "preflab/interview/themes.hpp"
#include "preflab/util/httplib.hpp"

using namespace preflab;
using namespace preflab::app;
using preflab::testing::cli;
using preflab::testing::CliResult;
using preflab::testing::slurp;
using preflab::testing::spit;
using preflab::testing::TempDir;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int config_code(const json& j) {
  try {
    AppConfig::from_json(j);
  } catch (const CommandError& e) {
    return e.code();
  }
  return 0;
}

// Synthetic fixture written under dir/synth plus a small-run config.
struct Fixture {
  TempDir tmp{"app"};
  fs::path art() const { return tmp.path / "art"; }
  fs::path synth() const { return art() / "synth"; }
  fs::path config() const { return tmp.path / "config.json"; }
  std::vector<std::string> base() const {
    return {"--artifacts-dir", art().string(), "--config", config().string(), "--seed", "3"};
  }
  std::vector<std::string> mock() const {
    auto b = base();
    b.insert(b.end(), {"--mock-llm", (synth() / "mock_script.json").string()});
    return b;
  }
  static std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }
  explicit Fixture(std::size_t n = 60) {
    spit(config(), json{{"split", {{"n_test", 10}}}, {"exploration", {{"n_iter_in", 3}}}}.dump());
    REQUIRE(cli({"--seed", "7", "--artifacts-dir", art().string(), "synth", "--n-images", std::to_string(n)}).code == 0);
  }
  CliResult ingest() const {
    return cli(cat(base(), {"ingest", (synth() / "manifest.jsonl").string(), "--dl-scores",
                            (synth() / "dl_scores.jsonl").string()}));
  }
};

std::string mock_file(const fs::path& dir) {
  const auto p = dir / "mock.json";
  spit(p, MockScript{}.to_json().dump());
  return p.string();
}

}  // namespace

TEST_CASE("config sections, unknown keys and secrets") {
  const auto defaults = AppConfig{}.to_json();
  CHECK(AppConfig::from_json(defaults).to_json() == defaults);
  CHECK(config_code({{"bogus", 1}}) == kExitConfigError);
  CHECK(config_code({{"exploration", {{"n_candiate", 3}}}}) == kExitConfigError);
  CHECK(config_code({{"training", {{"mode", "fs"}, {"family", "gbr"}}}}) == kExitConfigError);
  CHECK(config_code({{"roles", {{"interviewer", {{"api_key", "x"}}}}}}) == kExitConfigError);
  CHECK(config_code({{"gateway", {{"providers", {{"acme", {{"api_key", "x"}}}}}}}}) == kExitConfigError);
  CHECK(config_code({{"evaluation", {{"alternative", "sideways"}}}}) == kExitConfigError);

  auto c = AppConfig::from_json({{"seed", 9},
                                 {"split", {{"n_test", 20}}},
                                 {"training", {{"label", "FS-RR"}}},
                                 {"roles", {{"analyzer", {{"provider", "openai"}, {"model_id", "m"}}}}},
                                 {"gateway", {{"providers", {{"local", {{"dialect", "anthropic"}}}}}}}});
  CHECK(c.seed == 9);
  CHECK(c.split.n_test == 20);
  CHECK(c.training.label() == "FS-RR");
  CHECK(c.roles.at(llm::Role::Analyzer).model_id == "m");
  CHECK(c.gateway.providers.at("local").dialect == "anthropic");
  CHECK(c.to_json().dump().find("api_key") == std::string::npos);

  TempDir tmp("config");
  RunManifest m;
  m.run_id = "run-x";
  m.config = c.to_json();
  m.save(tmp.path);
  CHECK(AppConfig::load(tmp.path / kRunManifestFile).to_json() == c.to_json());
}

TEST_CASE("mock script answers") {
  MockScript s;
  s.applicability["warm_light"] = {{"img_001", 3}};
  s.default_applicability = 1;
  s.pool = {{"a", "A."}, {"b", "B."}, {"c", "C."}};
  s.rules = {{"SPECIAL", "scripted"}};
  const auto back = MockScript::from_json(s.to_json());
  CHECK(back.to_json() == s.to_json());

  llm::ChatRequest r;
  r.role = llm::Role::ApplicabilityEvaluator;
  r.messages = {{"user", "Feature name: warm_light\nFeature description: x\nImage ID: img_001\n"}};
  CHECK(s.answer(r) == "3");
  r.messages = {{"user", "Feature name: warm_light\nImage ID: img_999\n"}};
  CHECK(s.answer(r) == "1");
  r.role = llm::Role::FeatureGenerator;
  r.messages = {{"user", "Accepted: `a`\nPropose up to 1 new features"}};
  const auto reply = *s.answer(r);
  CHECK(reply.find("name: b") != std::string::npos);
  CHECK(reply.find("name: c") == std::string::npos);
  CHECK(reply.find("name: a") == std::string::npos);
  r.role = llm::Role::Interviewer;
  CHECK_FALSE(s.answer(r));

  auto p = s.provider();
  llm::ChatRequest q;
  q.messages = {{"user", "a SPECIAL prompt"}};
  CHECK(p->send(q, llm::RoleConfig{}).text == "scripted");

  CHECK_THROWS_AS(MockScript::from_json(json{{"format", "other"}}), CommandError);
  auto bad = s.to_json();
  bad["applicability"]["warm_light"]["img_001"] = 7;
  CHECK_THROWS_AS(MockScript::from_json(bad), CommandError);
}

TEST_CASE("synthetic fixture is deterministic and on the grid") {
  TempDir a("synth_a"), b("synth_b");
  SynthOptions o;
  o.seed = 7;
  write_synthetic(make_synthetic(o), a.path);
  write_synthetic(make_synthetic(o), b.path);
  for (const auto* f : {"manifest.jsonl", "dl_scores.jsonl", "mock_script.json", "latent.json"})
    CHECK(slurp(a.path / f) == slurp(b.path / f));
  o.seed = 8;
  CHECK(make_synthetic(o).dataset.ratings() != make_synthetic(SynthOptions{}).dataset.ratings());

  const auto fx = make_synthetic(SynthOptions{});
  CHECK(fx.dataset.size() == 300);
  CHECK(fx.latent_names.size() == 3);
  for (std::size_t i = 0; i < fx.hidden.size(); ++i) {
    const double r = fx.dataset.ratings()[i].rating;
    CHECK(on_rating_grid(r));
    CHECK(r == clip_and_round(fx.hidden[i].raw_rating).value());
    CHECK(fx.script.applicability.at("warm_light").at(fx.hidden[i].image_id) == fx.hidden[i].latent[0]);
  }
  CHECK(fx.script.pool.size() == 7);
  CHECK_THROWS(make_synthetic(SynthOptions{.latent_features = 0}));
}

TEST_CASE("synthetic calibration: high-level signal matters") {
  // Linear oracles on the hidden attributes: DL only versus everything.
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    SynthOptions o;
    o.seed = seed;
    const auto fx = make_synthetic(o);
    const auto split = split_dataset(fx.dataset, SplitOptions{}, seed);
    std::map<std::string, const SynthImage*> by_id;
    for (const auto& h : fx.hidden) by_id[h.image_id] = &h;
    auto rows = [&](const std::vector<std::string>& ids, bool ideal) {
      std::vector<std::vector<double>> X;
      for (const auto& id : ids) {
        const auto* h = by_id.at(id);
        if (!ideal) {
          X.push_back({h->dl_score});
          continue;
        }
        std::vector<double> r;
        for (int v : h->latent) r.push_back(v / 4.0);
        r.push_back(h->low_level);
        X.push_back(r);
      }
      return X;
    };
    const auto y_tr = fx.dataset.ratings_for(split.train_ids);
    const auto y_te = fx.dataset.ratings_for(split.test_ids);
    auto test_mae = [&](bool ideal) {
      const auto w = preflab::oracle::normal_equations_ols(rows(split.train_ids, ideal), y_tr);
      const auto X = rows(split.test_ids, ideal);
      double s = 0;
      for (std::size_t i = 0; i < X.size(); ++i) {
        double p = w[0];
        for (std::size_t k = 0; k < X[i].size(); ++k) p += w[k + 1] * X[i][k];
        s += std::abs(clip_and_round(p).value() - y_te[i]);
      }
      return s / static_cast<double>(X.size());
    };
    const double dl = test_mae(false), ideal = test_mae(true);
    CAPTURE(seed);
    CHECK(dl >= ideal + 0.1);
  }
}

TEST_CASE("run manifest keeps one record per stage") {
  TempDir tmp("manifest");
  auto m = RunManifest::open(tmp.path, json{{"a", 1}}, 5);
  CHECK(m.run_id.rfind("run-", 0) == 0);
  StageRecord s;
  s.name = "explore";
  s.artifacts = {{"features", "features.json"}};
  m.record(s);
  s.artifacts = {{"features", "features.json"}, {"trace", "exploration_trace.json"}};
  m.record(s);
  CHECK(m.stages.size() == 1);
  CHECK(m.artifacts().size() == 2);
  m.save(tmp.path);
  const auto again = RunManifest::open(tmp.path, json{{"a", 2}}, 6);
  CHECK(again.run_id == m.run_id);
  CHECK(again.stages.size() == 1);
  CHECK(again.config == json{{"a", 2}});
  CHECK(RunManifest::from_json(m.to_json()).to_json() == m.to_json());
}

TEST_CASE("ingest exit codes") {
  TempDir tmp("ingest");
  const auto art = (tmp.path / "art").string();
  const auto fx = make_synthetic(SynthOptions{});
  std::ostringstream os;
  serialize_dataset(fx.dataset, os);
  const auto good = tmp.path / "good.jsonl";
  spit(good, os.str());

  auto r = cli({"--artifacts-dir", art, "ingest", good.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(tmp.path / "art" / "store" / "dataset.jsonl"));
  const auto split = split_from_json(json::parse(slurp(tmp.path / "art" / "split.json")));
  CHECK(split.test_ids.size() == 45);
  CHECK(split.train_ids.size() == 204);

  r = cli({"--artifacts-dir", art, "ingest", good.string()});
  CHECK(r.code == kExitConflict);
  CHECK(r.err.find("store exists") != std::string::npos);
  CHECK(cli({"--artifacts-dir", art, "ingest", good.string(), "--force"}).code == 0);

  std::istringstream lines(os.str());
  std::string text, line;
  for (int i = 1; std::getline(lines, line); ++i) text += (i == 17 ? std::string("{\"image_id\": oops") : line) + "\n";
  const auto bad = tmp.path / "bad.jsonl";
  spit(bad, text);
  r = cli({"--artifacts-dir", (tmp.path / "art2").string(), "ingest", bad.string()});
  CHECK(r.code == kExitDataError);
  CHECK(r.err.find("line 17") != std::string::npos);

  r = cli({"--artifacts-dir", (tmp.path / "art3").string(), "ingest", (tmp.path / "nope.jsonl").string()});
  CHECK(r.code == kExitDataError);
}

TEST_CASE("missing artifacts, config errors and usage") {
  TempDir tmp("codes");
  const auto art = (tmp.path / "art").string();
  const auto mock = mock_file(tmp.path);
  CHECK(cli({"--artifacts-dir", art, "--mock-llm", mock, "explore"}).code == kExitMissingArtifact);
  CHECK(cli({"--artifacts-dir", art, "train"}).code == kExitMissingArtifact);
  CHECK(cli({"--artifacts-dir", art, "predict"}).code == kExitMissingArtifact);
  CHECK(cli({"--artifacts-dir", art, "evaluate"}).code == kExitMissingArtifact);

  spit(tmp.path / "cfg.json", R"({"exploration": {"bogus": 1}})");
  auto r = cli({"--artifacts-dir", art, "--config", (tmp.path / "cfg.json").string(), "synth"});
  CHECK(r.code == kExitConfigError);
  CHECK(r.err.find("bogus") != std::string::npos);
  CHECK(cli({"--artifacts-dir", art, "--config", (tmp.path / "none.json").string(), "synth"}).code == kExitConfigError);
  CHECK(cli({"--artifacts-dir", art, "frobnicate"}).code == kExitConfigError);
  CHECK(cli({"--artifacts-dir", art, "train", "--label", "HPS-XYZ"}).code == kExitConfigError);
  CHECK(cli({"--artifacts-dir", art, "train", "--mode", "fs", "--model", "gbr"}).code == kExitConfigError);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"--artifacts-dir", art, "--mock-llm", (tmp.path / "nope.json").string(), "synth"}).code == kExitConfigError);
}

TEST_CASE("explore without role configuration gives a hint") {
  Fixture fx;
  REQUIRE(fx.ingest().code == 0);
  auto r = cli(Fixture::cat(fx.base(), {"explore"}));
  CHECK(r.code == kExitConfigError);
  CHECK(r.err.find("feature_generator") != std::string::npos);
  CHECK(r.err.find("hint:") != std::string::npos);
  CHECK(r.err.find("--mock-llm") != std::string::npos);
}

TEST_CASE("pipeline smoke: explore, train, predict, evaluate and reruns") {
  Fixture fx;
  REQUIRE(fx.ingest().code == 0);
  auto r = cli(Fixture::cat(fx.mock(), {"explore"}));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accepted") != std::string::npos);
  r = cli(Fixture::cat(fx.base(), {"train", "--mode", "hps", "--model", "gbr", "--with-dl"}));
  REQUIRE(r.code == 0);
  const auto system = json::parse(slurp(fx.art() / "system" / "system.json"));
  CHECK(system["label"] == "HPS-GBR-withDL");
  CHECK(r.out.find("HPS-GBR-withDL") != std::string::npos);

  r = cli(Fixture::cat(fx.base(), {"predict", "--discretize"}));
  REQUIRE(r.code == 0);
  const auto preds = read_predictor_scores_file((fx.art() / "predictions" / "HPS-GBR-withDL.jsonl").string());
  CHECK(preds.scores().size() == 10);
  for (const auto& [_, v] : preds.scores()) CHECK(on_rating_grid(v));

  r = cli(Fixture::cat(fx.base(), {"evaluate"}));
  REQUIRE(r.code == 0);
  const auto report = json::parse(slurp(fx.art() / "report" / "report.json"));
  CHECK(report["baseline"] == "DL");
  CHECK(report["table"].size() == 2);
  CHECK(r.out == slurp(fx.art() / "report" / "summary.txt"));

  // rerun from the manifest snapshot reproduces the stage artifacts
  const auto features = slurp(fx.art() / "features.json");
  const auto model = slurp(fx.art() / "system" / "model.json");
  const auto manifest = (fx.art() / kRunManifestFile).string();
  const std::vector<std::string> again{"--artifacts-dir", fx.art().string(), "--config", manifest, "--mock-llm",
                                       (fx.synth() / "mock_script.json").string()};
  REQUIRE(cli(Fixture::cat(again, {"explore"})).code == 0);
  REQUIRE(cli(Fixture::cat(again, {"train", "--label", "HPS-GBR-withDL"})).code == 0);
  CHECK(slurp(fx.art() / "features.json") == features);
  CHECK(slurp(fx.art() / "system" / "model.json") == model);

  const auto m = RunManifest::from_json(json::parse(slurp(manifest)));
  for (const auto* stage : {"synth", "ingest", "explore", "train", "predict", "evaluate"}) CHECK(m.stage(stage));
  for (const auto& [name, path] : m.artifacts()) {
    CAPTURE(name);
    CHECK(fs::exists(fx.art() / path));
  }
  // nothing written beside the artifacts directory and the config we made
  std::set<std::string> top;
  for (const auto& e : fs::directory_iterator(fx.tmp.path)) top.insert(e.path().filename().string());
  CHECK(top == std::set<std::string>{"art", "config.json"});
}

TEST_CASE("train without DL scores fails as a missing artifact") {
  Fixture fx;
  REQUIRE(cli(Fixture::cat(fx.base(), {"ingest", (fx.synth() / "manifest.jsonl").string()})).code == 0);
  REQUIRE(cli(Fixture::cat(fx.mock(), {"explore"})).code == 0);
  CHECK(cli(Fixture::cat(fx.base(), {"train", "--label", "HPS-GBR-withDL"})).code == kExitMissingArtifact);
  CHECK(cli(Fixture::cat(fx.base(), {"train", "--label", "FS-LR"})).code == 0);
  CHECK(json::parse(slurp(fx.art() / "system" / "system.json"))["label"] == "FS-LR");
}

TEST_CASE("evaluate with two score files carries a paired test") {
  TempDir tmp("evaluate");
  PredictorScores truth, a, b;
  truth.predictor_name = "truth";
  a.predictor_name = "DL";
  b.predictor_name = "PS";
  Rng rng(12);
  for (int p = 0; p < 8; ++p)
    for (int i = 0; i < 20; ++i) {
      const auto pid = "p" + std::to_string(p), id = "img_" + std::to_string(i);
      const double t = 1.0 + 0.5 * static_cast<double>(rng.below(9));
      truth.by_participant[pid][id] = t;
      a.by_participant[pid][id] = t + 0.8 * rng.normal();
      b.by_participant[pid][id] = t + 0.3 * rng.normal();
    }
  auto write = [&](const PredictorScores& s, const std::string& name) {
    std::ostringstream os;
    write_predictor_scores(s, os);
    spit(tmp.path / name, os.str());
    return (tmp.path / name).string();
  };
  const auto art = (tmp.path / "art").string();
  auto r = cli({"--artifacts-dir", art, "evaluate", "--truth", write(truth, "t.jsonl"), "--scores", write(a, "a.jsonl"),
                write(b, "b.jsonl")});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(slurp(tmp.path / "art" / "report" / "report.json"));
  CHECK(rep["baseline"] == "DL");
  REQUIRE_FALSE(rep["table"][1]["test"].is_null());
  CHECK(rep["table"][1]["test"]["p_raw"].get<double>() < 0.05);
  CHECK(rep["table"][1]["test"]["direction"] == "B");
  CHECK(rep["participants"].size() == 8);

  r = cli({"--artifacts-dir", art, "evaluate", "--truth", (tmp.path / "t.jsonl").string(), "--scores",
           (tmp.path / "a.jsonl").string(), "--baseline", "nobody"});
  CHECK(r.code == kExitDataError);
}

namespace {

// Drives one session to completion over HTTP; returns the number of answers.
int run_session(httplib::Client& c, const std::string& participant, const std::string& theme) {
  auto res = c.Post("/sessions", json{{"participant_id", participant}, {"theme", theme}}.dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  const auto id = json::parse(res->body)["session_id"].get<std::string>();
  for (int n = 1; n <= 40; ++n) {
    auto a = c.Post(("/sessions/" + id + "/answers").c_str(), json{{"text", "Answer " + std::to_string(n)}}.dump(),
                    "application/json");
    REQUIRE(a);
    REQUIRE(a->status == 200);
    if (json::parse(a->body).value("finalized", false)) return n;
  }
  return -1;
}

}  // namespace

TEST_CASE("interview command serves sessions until every theme is finalized") {
  using interview::ThemeName;
  TempDir tmp("interview");
  for (const std::string theme : {std::string("PreferenceTargets"), std::string("all")}) {
    GlobalOptions g;
    g.artifacts_dir = tmp.path / ("art_" + theme);
    g.mock_llm = mock_file(tmp.path);
    std::ostringstream out, err;
    Context ctx(g, out, err);
    std::promise<int> port;
    InterviewOptions o;
    o.participant = "p01";
    o.theme = theme == "all" ? "all" : interview::to_string(ThemeName::PreferenceTargets);
    o.port = 0;
    o.timeout_seconds = 60;
    o.on_listening = [&](int p) { port.set_value(p); };
    auto done = std::async(std::launch::async, [&] { return cmd_interview(ctx, o); });
    httplib::Client c("127.0.0.1", port.get_future().get());
    std::vector<int> answers;
    const auto themes = theme == "all" ? interview::all_theme_names() : std::vector<ThemeName>{ThemeName::PreferenceTargets};
    for (auto t : themes) answers.push_back(run_session(c, "p01", interview::to_string(t)));
    REQUIRE(done.get() == 0);
    if (theme == "all") CHECK(answers == std::vector<int>{15, 10, 10});
    else CHECK(answers == std::vector<int>{15});
    for (auto t : themes) {
      const auto arch = interview::read_archive(interview::archive_path(g.artifacts_dir / "interviews", "p01", t));
      CHECK(arch.finalized);
      CHECK(static_cast<int>(arch.history.size()) == interview::standard_theme(t).question_budget);
      CHECK(arch.history.back().answer.has_value());
    }
    const auto m = RunManifest::from_json(json::parse(slurp(g.artifacts_dir / kRunManifestFile)));
    CHECK(m.stage("interview")->artifacts.size() == themes.size());
  }
}

TEST_CASE("interview command exit codes") {
  TempDir tmp("interview_codes");
  const auto art = (tmp.path / "art").string();
  auto r = cli({"--artifacts-dir", art, "interview", "--participant", "p01"});
  CHECK(r.code == kExitConfigError);
  CHECK(r.err.find("hint:") != std::string::npos);
  CHECK(r.err.find("interviewer") != std::string::npos);

  httplib::Server busy;
  const int port = busy.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  r = cli({"--artifacts-dir", art, "--mock-llm", mock_file(tmp.path), "interview", "--participant", "p01", "--port",
           std::to_string(port)});
  CHECK(r.code == kExitConflict);
  CHECK(r.err.find("busy") != std::string::npos);

  CHECK(cli({"--artifacts-dir", art, "--mock-llm", mock_file(tmp.path), "interview", "--participant", "../x"}).code ==
        kExitConfigError);
  CHECK(cli({"--artifacts-dir", art, "--mock-llm", mock_file(tmp.path), "interview", "--participant", "p01", "--theme",
             "Nope"})
            .code == kExitConfigError);
}
