#include "preflab/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "preflab/app/errors.hpp"
#include "preflab/core/dataset.hpp"
#include "preflab/core/random.hpp"
#include "preflab/core/scores.hpp"
#include "preflab/core/split.hpp"
#include "preflab/eval/report.hpp"
#include "preflab/features/exploration.hpp"
#include "preflab/features/feature_set.hpp"
#include "preflab/interview/archive.hpp"
#include "preflab/interview/server.hpp"
#include "preflab/llm/payload.hpp"
#include "preflab/trainer/system.hpp"

namespace preflab::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw missing_artifact("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw missing_artifact(fmt::format("{} not found; run `preflab {}` first", path.string(), producer));
}

// Relative to the artifacts directory when inside it, absolute otherwise.
std::string relative(const Layout& l, const fs::path& p) {
  const auto rel = fs::absolute(p).lexically_normal().lexically_relative(fs::absolute(l.root).lexically_normal());
  if (rel.empty() || *rel.begin() == "..") return fs::absolute(p).lexically_normal().string();
  return rel.generic_string();
}

Dataset load_dataset(const Layout& l) {
  require(l.dataset(), "ingest");
  return ingest_dataset_file(l.dataset().string());
}

DatasetSplit load_split(const Layout& l) {
  require(l.split(), "ingest");
  try {
    return split_from_json(read_json(l.split()));
  } catch (const json::exception& e) {
    throw data_error(l.split().string() + ": " + e.what());
  }
}

PredictorScores load_scores(const fs::path& path) {
  if (!fs::exists(path)) throw missing_artifact("score file " + path.string() + " not found");
  return read_predictor_scores_file(path.string());
}

StageRecord begin_stage(const std::string& name, std::uint64_t seed = 0) {
  StageRecord st;
  st.name = name;
  st.seed = seed;
  st.started_at = utc_timestamp();
  return st;
}

std::string scores_text(const PredictorScores& s) {
  std::ostringstream os;
  write_predictor_scores(s, os);
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- context

Context::Context(GlobalOptions options, std::ostream& out, std::ostream& err)
    : options_(std::move(options)), out_(out), err_(err) {
  if (options_.config_path) config_ = AppConfig::load(*options_.config_path);
  seed_ = options_.seed.value_or(config_.seed);
  config_.seed = seed_;
  layout_.root = options_.artifacts_dir;
  if (options_.mock_llm) script_ = MockScript::load(*options_.mock_llm);
}

std::uint64_t Context::stage_seed(StageSeed tag) const {
  return derive_seed(seed_, {static_cast<std::uint64_t>(tag)});
}

std::unique_ptr<llm::Gateway> Context::gateway(const std::vector<llm::Role>& needed, const std::string& log_name) const {
  llm::RoleTable roles = script_ ? llm::uniform_role_table("mock", "mock") : config_.roles;
  if (!roles.count(llm::Role::RetryFallback) && roles.count(llm::Role::ApplicabilityEvaluator)) {
    auto fb = roles.at(llm::Role::ApplicabilityEvaluator);
    fb.role = llm::Role::RetryFallback;
    roles[llm::Role::RetryFallback] = fb;
  }
  for (auto r : needed)
    if (!roles.count(r))
      throw config_error(fmt::format(
          "no configuration for LLM role '{0}'.\n"
          "hint: add \"roles\": {{\"{0}\": {{\"provider\": \"openai\", \"model_id\": \"...\"}}}} to the file given with "
          "--config (API key in PREFLAB_OPENAI_API_KEY), or pass --mock-llm <script.json> for an offline run",
          llm::to_string(r)));

  llm::GatewayOptions go;
  go.max_attempts = config_.gateway.max_attempts;
  go.backoff_base = std::chrono::milliseconds(config_.gateway.backoff_ms);
  go.backoff_factor = config_.gateway.backoff_factor;
  go.log_path = layout_.logs() / ("llm_" + log_name + ".jsonl");
  fs::create_directories(layout_.logs());
  auto gw = std::make_unique<llm::Gateway>(roles, go);

  std::set<std::string> providers;
  for (const auto& [_, cfg] : roles) providers.insert(cfg.provider);
  for (const auto& name : providers) {
    if (name == "mock") {
      gw->register_provider(script_ ? script_->provider() : MockScript{}.provider());
      continue;
    }
    ProviderSettings ps;
    if (auto it = config_.gateway.providers.find(name); it != config_.gateway.providers.end()) ps = it->second;
    else if (name == "anthropic") ps.dialect = "anthropic";
    else if (name != "openai")
      throw config_error(fmt::format("provider '{0}' is not configured; add gateway.providers.{0} with a dialect", name));
    try {
      auto ho = llm::http_options_from_env(name, ps.dialect == "anthropic" ? llm::HttpDialect::Anthropic
                                                                          : llm::HttpDialect::OpenAi);
      if (!ps.base_url.empty()) ho.base_url = ps.base_url;
      ho.timeout_seconds = ps.timeout_seconds;
      gw->register_provider(std::make_shared<llm::HttpProvider>(ho), ps.requests_per_minute);
    } catch (const llm::ConfigError& e) {
      throw config_error(std::string(e.what()) + "\nhint: export the key, or pass --mock-llm <script.json>");
    }
  }
  return gw;
}

features::PayloadSource Context::payloads() const {
  if (script_) return [](const ImageRecord& r) { return std::vector<llm::ImagePayload>{llm::reference_payload(r.uri)}; };
  fs::path base;
  if (fs::exists(layout_.source())) base = read_json(layout_.source()).value("image_base_dir", std::string());
  return [base](const ImageRecord& r) { return std::vector<llm::ImagePayload>{llm::load_image_payload(r.uri, base)}; };
}

RunManifest Context::manifest() const { return RunManifest::open(layout_.root, config_.to_json(), seed_); }

void Context::save(RunManifest& manifest, StageRecord stage) const {
  stage.finished_at = utc_timestamp();
  manifest.record(std::move(stage));
  manifest.save(layout_.root);
}

// ----------------------------------------------------------------- ingest

int cmd_ingest(Context& ctx, const IngestOptions& o) {
  const auto& l = ctx.layout();
  StageRecord st = begin_stage("ingest", ctx.stage_seed(StageSeed::Split));
  if (fs::exists(l.dataset()) && !o.force)
    throw conflict(fmt::format("store exists at {}; pass --force to replace it", l.store().string()));
  if (!fs::exists(o.manifest)) throw data_error("manifest " + o.manifest.string() + " not found");

  const Dataset d = ingest_dataset_file(o.manifest.string());
  if (d.size() <= ctx.config().split.n_test)
    throw data_error(fmt::format("dataset has {} images; the split needs more than n_test = {}", d.size(),
                                 ctx.config().split.n_test));
  std::optional<PredictorScores> dl;
  if (o.dl_scores) {
    dl = load_scores(*o.dl_scores);
    dl->validate_against(d);
  }
  const auto split = split_dataset(d, ctx.config().split, st.seed);

  if (o.force) fs::remove_all(l.store());
  std::ostringstream store;
  serialize_dataset(d, store);
  write_file(l.dataset(), store.str());
  write_file(l.source(), json{{"manifest", fs::absolute(o.manifest).lexically_normal().string()},
                              {"image_base_dir", fs::absolute(o.manifest).parent_path().lexically_normal().string()},
                              {"n_images", d.size()}}
                                 .dump(2) + "\n");
  write_file(l.split(), split_to_json(split).dump(2) + "\n");
  st.artifacts = {{"dataset", relative(l, l.dataset())}, {"source", relative(l, l.source())}, {"split", relative(l, l.split())}};
  if (dl) {
    write_file(l.dl_scores(), scores_text(*dl));
    st.artifacts["dl_scores"] = relative(l, l.dl_scores());
  }
  st.details = {{"n_images", d.size()},
                {"test", split.test_ids.size()},
                {"train", split.train_ids.size()},
                {"val", split.val_ids.size()},
                {"inner_train", split.inner_train_ids.size()},
                {"inner_val", split.inner_val_ids.size()}};
  auto m = ctx.manifest();
  ctx.save(m, std::move(st));
  ctx.out() << fmt::format("ingested {} images; split test/train/val = {}/{}/{}\n", d.size(), split.test_ids.size(),
                           split.train_ids.size(), split.val_ids.size());
  return kExitOk;
}

// -------------------------------------------------------------- interview

int cmd_interview(Context& ctx, const InterviewOptions& o) {
  const auto& l = ctx.layout();
  StageRecord st = begin_stage("interview");
  try {
    interview::validate_participant_id(o.participant);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  std::vector<interview::ThemeName> themes;
  try {
    if (o.theme == "all") themes = interview::all_theme_names();
    else themes = {interview::parse_theme_name(o.theme)};
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  auto gw = ctx.gateway({llm::Role::Interviewer, llm::Role::Analyzer}, "interview");

  std::mutex mu;
  std::condition_variable cv;
  std::set<interview::ThemeName> done;
  const std::set<interview::ThemeName> wanted(themes.begin(), themes.end());
  interview::ServiceOptions so;
  so.session.archive_root = l.interviews();
  so.on_finalized = [&](const interview::InterviewDataContainer& c) {
    std::lock_guard lock(mu);
    if (c.participant_id == o.participant && wanted.count(c.theme.name)) done.insert(c.theme.name);
    cv.notify_all();
  };
  interview::InterviewService service(*gw, so);
  httplib::Server server;
  // The default SO_REUSEPORT would let a second instance share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  service.mount(server);
  int port = o.port;
  if (port == 0) port = server.bind_to_any_port(o.host);
  else if (!server.bind_to_port(o.host, port)) port = -1;
  if (port <= 0) throw conflict(fmt::format("port {} on {} is busy", o.port, o.host));
  std::thread listener([&] { server.listen_after_bind(); });

  ctx.out() << fmt::format("interview service for participant {} at http://{}:{}\n", o.participant, o.host, port);
  for (auto t : themes)
    ctx.out() << fmt::format("  theme {} ({} questions)\n", interview::to_string(t),
                             interview::standard_theme(t).question_budget);
  ctx.out().flush();
  if (o.on_listening) o.on_listening(port);

  bool complete = false;
  {
    std::unique_lock lock(mu);
    auto pred = [&] { return done.size() == wanted.size(); };
    if (o.timeout_seconds) complete = cv.wait_for(lock, std::chrono::duration<double>(*o.timeout_seconds), pred);
    else {
      cv.wait(lock, pred);
      complete = true;
    }
  }
  server.stop();
  listener.join();

  for (auto t : themes) {
    const auto p = interview::archive_path(l.interviews(), o.participant, t);
    if (fs::exists(p)) st.artifacts["interview_" + interview::to_string(t)] = relative(l, p);
  }
  st.details = {{"participant", o.participant}, {"complete", complete}};
  auto m = ctx.manifest();
  ctx.save(m, std::move(st));
  if (!complete) {
    ctx.err() << "error: interview timed out before every theme was finalized\n";
    return kExitFailure;
  }
  ctx.out() << "all sessions finalized; archives under " << l.interviews().string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- explore

int cmd_explore(Context& ctx, const ExploreOptions& o) {
  const auto& l = ctx.layout();
  StageRecord st = begin_stage("explore", ctx.stage_seed(StageSeed::Explore));
  const Dataset d = load_dataset(l);
  const DatasetSplit split = load_split(l);
  auto cfg = ctx.config().exploration;
  if (o.iterations) cfg.n_iter_in = *o.iterations;
  if (o.no_interview) cfg.use_interview = false;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }

  std::string digest;
  if (cfg.use_interview && fs::exists(l.interviews() / o.participant))
    digest = interview::interview_digest(interview::load_participant_archives(l.interviews(), o.participant));

  auto gw = ctx.gateway({llm::Role::FeatureGenerator, llm::Role::ApplicabilityEvaluator}, "explore");
  features::ApplicabilityEvaluator ev(*gw, ctx.payloads(),
                                      {ctx.options().strict_llm, static_cast<std::size_t>(ctx.config().workers)});
  features::ExplorationTrace trace;
  const auto state = features::run_exploration(d, split, digest, cfg, *gw, ev, st.seed, &trace);
  features::write_feature_set(l.features(), state, cfg);

  json tj = json::array();
  for (const auto& it : trace.iterations) {
    json calls = json::array();
    for (const auto& c : it.calls)
      calls.push_back({{"tail", c.tail == features::Tail::Positive ? "positive" : "negative"},
                       {"image_ids", c.image_ids},
                       {"parsed", c.parsed},
                       {"kept", c.kept},
                       {"failed", c.failed}});
    tj.push_back({{"iteration", it.iteration},
                  {"cold_start", it.cold_start},
                  {"models", it.models.size()},
                  {"calls", calls},
                  {"accepted", it.newly_accepted},
                  {"rejected", it.newly_rejected}});
  }
  write_file(l.trace(), json{{"iterations", tj}}.dump(1) + "\n");

  std::vector<std::string> accepted;
  for (const auto& f : state.accepted) accepted.push_back(f.feature.name);
  st.artifacts = {{"features", relative(l, l.features())}, {"exploration_trace", relative(l, l.trace())}};
  st.details = {{"accepted", accepted},
                {"rejected", state.rejected.size()},
                {"iterations", cfg.n_iter_in},
                {"applicability_calls", ev.stats().calls},
                {"missing_cells", ev.stats().missing},
                {"interview_digest", !digest.empty()}};
  auto m = ctx.manifest();
  ctx.save(m, std::move(st));
  ctx.out() << fmt::format("accepted {} features, rejected {}\n", accepted.size(), state.rejected.size());
  for (const auto& f : state.accepted)
    ctx.out() << fmt::format("  {:<24} r = {:+.3f}  mean a = {:.3f}\n", f.feature.name, f.screen.correlation,
                             f.screen.mean_applicability);
  return kExitOk;
}

// ------------------------------------------------------------------ train

int cmd_train(Context& ctx, const TrainOptions& o) {
  const auto& l = ctx.layout();
  StageRecord st = begin_stage("train", ctx.stage_seed(StageSeed::Train));
  auto tc = ctx.config().training;
  try {
    if (o.label) {
      const auto from = trainer::config_from_label(*o.label);
      tc.mode = from.mode;
      tc.family = from.family;
      tc.with_dl = from.with_dl;
    }
    if (o.mode) tc.mode = trainer::parse_training_mode(*o.mode);
    if (o.model) tc.family = ml::parse_model_kind(*o.model);
    if (o.with_dl) tc.with_dl = *o.with_dl;
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  require(l.features(), "explore");
  const Dataset d = load_dataset(l);
  const DatasetSplit split = load_split(l);

  std::map<std::string, double> dl;
  if (tc.with_dl) {
    const auto path = o.dl_scores.value_or(l.dl_scores());
    if (!fs::exists(path))
      throw missing_artifact(fmt::format("{} needs DL scores: {} not found (ingest with --dl-scores or pass --dl-scores)",
                                         tc.label(), path.string()));
    const auto s = load_scores(path);
    s.validate_against(d);
    dl = s.scores();
  }
  const auto fset = features::read_feature_set(l.features());
  const auto sys = trainer::train_system(fset.state, d, split, tc.with_dl ? &dl : nullptr, tc, st.seed);
  fs::remove_all(l.system());
  trainer::write_bundle(l.system(), sys, fset.state, fset.config);

  std::vector<std::string> names;
  for (const auto& f : sys.features) names.push_back(f.name);
  st.artifacts = {{"system", relative(l, l.system())}};
  st.details = {{"label", sys.label}, {"val_mae", sys.val_mae}, {"features", names}};
  auto m = ctx.manifest();
  ctx.save(m, std::move(st));
  ctx.out() << fmt::format("trained {} on {} features; validation MAE {:.3f}\n", sys.label, names.size(), sys.val_mae);
  return kExitOk;
}

// ---------------------------------------------------------------- predict

int cmd_predict(Context& ctx, const PredictOptions& o) {
  const auto& l = ctx.layout();
  StageRecord st = begin_stage("predict");
  require(l.system() / "system.json", "train");
  const auto sys = [&] {
    try {
      return trainer::read_bundle(l.system());
    } catch (const std::runtime_error& e) {
      throw missing_artifact(e.what());
    }
  }();
  const Dataset d = load_dataset(l);

  std::vector<std::string> ids = o.images;
  if (ids.empty()) {
    const auto split = load_split(l);
    if (o.split == "test") ids = split.test_ids;
    else if (o.split == "val") ids = split.val_ids;
    else if (o.split == "train") ids = split.train_ids;
    else if (o.split == "all") ids = d.ids();
    else throw config_error("--split must be test, val, train or all");
  }
  for (const auto& id : ids)
    if (!d.contains(id)) throw data_error("unknown image '" + id + "'");

  std::map<std::string, double> dl;
  if (sys.with_dl) {
    require(l.dl_scores(), "ingest --dl-scores");
    dl = load_scores(l.dl_scores()).scores();
  }

  bool need_llm = false;
  for (const auto& id : ids)
    for (const auto& f : sys.features)
      if (!sys.matrix.has(f.name, id)) need_llm = true;
  std::unique_ptr<llm::Gateway> gw;
  std::unique_ptr<features::ApplicabilityEvaluator> ev;
  if (need_llm) {
    gw = ctx.gateway({llm::Role::ApplicabilityEvaluator}, "predict");
    ev = std::make_unique<features::ApplicabilityEvaluator>(
        *gw, ctx.payloads(),
        features::EvaluatorOptions{ctx.options().strict_llm, static_cast<std::size_t>(ctx.config().workers)});
  }

  PredictorScores out;
  out.predictor_name = sys.label;
  out.provenance = fmt::format("preflab system {} (seed {})", sys.label, sys.seed);
  auto& scores = out.by_participant[kDefaultParticipant];
  std::size_t calls = 0;
  for (const auto& id : ids) {
    std::optional<double> dls;
    if (sys.with_dl) {
      auto it = dl.find(id);
      if (it == dl.end()) throw data_error("no DL score for '" + id + "'");
      dls = it->second;
    }
    const auto p = trainer::predict(sys, d.image(id), dls, ev.get(), o.discretize);
    scores[id] = p.discrete ? p.discrete->value() : p.score;
    calls += p.llm_calls;
  }
  const auto path = o.out.value_or(l.predictions() / (sys.label + ".jsonl"));
  write_file(path, scores_text(out));
  st.artifacts = {{"predictions_" + sys.label, relative(l, path)}};
  st.details = {{"label", sys.label}, {"n", ids.size()}, {"llm_calls", calls}, {"discretized", o.discretize}};
  auto m = ctx.manifest();
  ctx.save(m, std::move(st));
  ctx.out() << fmt::format("wrote {} predictions to {}\n", ids.size(), path.string());
  return kExitOk;
}

// --------------------------------------------------------------- evaluate

int cmd_evaluate(Context& ctx, const EvaluateOptions& o) {
  const auto& l = ctx.layout();
  StageRecord st = begin_stage("evaluate");
  eval::EvaluationInput in;
  in.discretize = o.discretize.value_or(ctx.config().evaluation.discretize);
  in.include_giaa = o.giaa || ctx.config().evaluation.include_giaa;
  try {
    in.alternative = eval::parse_alternative(o.alternative.value_or(ctx.config().evaluation.alternative));
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }

  if (o.truth) {
    in.truth = load_scores(*o.truth).by_participant;
  } else {
    const Dataset d = load_dataset(l);
    const auto split = load_split(l);
    auto& t = in.truth[kDefaultParticipant];
    for (const auto& id : split.test_ids) t[id] = d.rating(id);
  }

  std::vector<fs::path> files = o.scores;
  if (files.empty()) {
    if (fs::exists(l.dl_scores())) files.push_back(l.dl_scores());
    if (fs::exists(l.predictions())) {
      std::vector<fs::path> preds;
      for (const auto& e : fs::directory_iterator(l.predictions()))
        if (e.path().extension() == ".jsonl") preds.push_back(e.path());
      std::sort(preds.begin(), preds.end());
      files.insert(files.end(), preds.begin(), preds.end());
    }
    if (files.empty()) throw missing_artifact("no score files; pass --scores or run `preflab predict` first");
  }
  for (const auto& f : files) in.predictors.push_back(load_scores(f));
  if (o.baseline) in.baseline = *o.baseline;
  else
    for (const auto& p : in.predictors)
      if (p.predictor_name == "DL") in.baseline = "DL";

  eval::EvaluationReport report;
  try {
    report = eval::evaluate(in);
  } catch (const std::invalid_argument& e) {
    throw data_error(e.what());
  }
  const auto dir = o.out.value_or(l.report());
  eval::write_report(report, dir);
  st.artifacts = {{"report", relative(l, dir)}};
  st.details = {{"baseline", report.baseline}, {"predictors", report.table.size()}};
  auto m = ctx.manifest();
  ctx.save(m, std::move(st));
  ctx.out() << eval::render_summary(report);
  return kExitOk;
}

// ------------------------------------------------------------------ synth

int cmd_synth(Context& ctx, const SynthCommandOptions& o) {
  const auto& l = ctx.layout();
  StageRecord st = begin_stage("synth", ctx.seed());
  SynthOptions so;
  so.seed = ctx.seed();
  so.n_images = o.n_images;
  so.latent_features = o.latent_features;
  SynthFixture fx;
  try {
    fx = make_synthetic(so);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  const auto dir = o.out.value_or(l.synth());
  write_synthetic(fx, dir);
  for (const auto* f : {"manifest.jsonl", "dl_scores.jsonl", "mock_script.json", "latent.json"})
    st.artifacts[std::string("synth_") + fs::path(f).stem().string()] = relative(l, dir / f);
  st.details = {{"n_images", so.n_images}, {"latent_features", fx.latent_names}};
  auto m = ctx.manifest();
  ctx.save(m, std::move(st));
  ctx.out() << fmt::format("wrote synthetic fixture ({} images, latent {}) to {}\n", so.n_images,
                           fmt::join(fx.latent_names, ", "), dir.string());
  return kExitOk;
}

}  // namespace preflab::app
