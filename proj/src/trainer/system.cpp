#include "preflab/trainer/system.hpp"

#include <fstream>

#include "preflab/ml/regressors.hpp"
#include "preflab/trainer/design.hpp"
#include "preflab/trainer/forward.hpp"
#include "preflab/trainer/screening.hpp"
#include "preflab/trainer/search.hpp"

namespace preflab::trainer {

namespace {

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("bundle file missing: " + p.string());
  return nlohmann::json::parse(in);
}

void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(1) << "\n";
}

}  // namespace

PredictionSystem train_system(const features::ExplorationState& exploration, const Dataset& dataset,
                              const DatasetSplit& split, const std::map<std::string, double>* dl_scores,
                              const TrainingConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.with_dl && !dl_scores) throw std::invalid_argument(config.label() + " needs DL scores");
  const auto* dl = config.with_dl ? dl_scores : nullptr;
  const auto y_tr = dataset.ratings_for(split.train_ids);
  const auto y_val = dataset.ratings_for(split.val_ids);

  std::vector<std::string> accepted;
  for (const auto& r : exploration.accepted) accepted.push_back(r.feature.name);
  const auto screened =
      screen_features(exploration.matrix, accepted, split.train_ids, y_tr, config.n_screened, config.max_clusters);

  const auto train = build_design(exploration.matrix, screened.features, split.train_ids, y_tr, dl);
  const auto val = build_design(exploration.matrix, screened.features, split.val_ids, y_val, dl);

  nlohmann::json report{{"label", config.label()},
                        {"n_train", split.train_ids.size()},
                        {"n_val", split.val_ids.size()},
                        {"n_accepted", accepted.size()},
                        {"screened", screened.to_json()},
                        {"seed", seed}};

  std::optional<ml::FittedModel> model;
  double val_mae = 0.0;
  const std::vector<std::string> base = dl ? std::vector<std::string>{kDlColumn} : std::vector<std::string>{};

  auto fallback = [&](const char* why) {
    // DL column alone, or intercept only
    const auto Xt = train.select_columns(base);
    model = ml::fit_ols(Xt);
    val_mae = mae(y_val, model->predict(val.select_columns(base)));
    report["fallback"] = why;
  };

  if (config.mode == TrainingMode::Hps) {
    if (train.cols() == 0) {
      fallback("no screened features and no DL column: constant model");
    } else {
      const auto res =
          hyperparameter_search(train, val, config.family, config.grid.points(config.family), seed, config.workers);
      model = res.model;
      val_mae = res.val_mae;
      nlohmann::json evals = nlohmann::json::array();
      for (const auto& e : res.evaluations)
        evals.push_back({{"hyperparameters", ml::hyperparameters_to_json(e.hyperparameters)}, {"val_mae", e.val_mae}});
      report["grid"] = evals;
      report["best_index"] = res.best_index;
    }
  } else {
    ForwardOptions fo;
    fo.kind = config.family;
    fo.ridge_alpha = config.fs_ridge_alpha;
    fo.l_thre = config.l_thre;
    fo.n_iter_out = config.n_iter_out;
    fo.base_columns = base;
    const auto res = forward_selection(train, val, screened, fo);
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : res.steps) steps.push_back({{"feature", s.feature}, {"cluster", s.cluster}, {"val_mae", s.val_mae}});
    report["steps"] = steps;
    if (res.rejected_step)
      report["stopped_at"] = {{"feature", res.rejected_step->feature}, {"val_mae", res.rejected_step->val_mae}};
    if (res.model) {
      model = *res.model;
      val_mae = res.val_mae;
    } else {
      fallback(dl ? "no feature selected: DL-only model" : "no feature selected: constant model");
    }
  }
  if (dl && !report.contains("fallback")) {
    // raw DL scores, for reference next to the trained system
    std::vector<double> raw;
    for (const auto& id : split.val_ids) raw.push_back(dl->at(id));
    report["dl_raw_val_mae"] = mae(y_val, raw);
  }
  report["val_mae"] = val_mae;
  report["train_mae"] = mae(y_tr, model->predict(train.select_columns(model->feature_names())));

  PredictionSystem sys{config.label(), *model, {}, config.with_dl, val_mae, seed, config, {}, report};
  std::vector<std::string> used;
  for (const auto& name : model->feature_names()) {
    if (name == kDlColumn) continue;
    used.push_back(name);
    for (const auto& r : exploration.accepted)
      if (r.feature.name == name) sys.features.push_back(r.feature);
  }
  sys.matrix = exploration.matrix.restricted_to(used);
  return sys;
}

void write_bundle(const std::filesystem::path& dir, const PredictionSystem& system,
                  const features::ExplorationState& exploration, const features::ExplorationConfig& exploration_config) {
  std::filesystem::create_directories(dir);
  write_json(dir / "model.json", system.model.to_json());
  features::write_feature_set(dir / "features.json", exploration, exploration_config);
  write_json(dir / "config.json", system.config.to_json());
  write_json(dir / "validation_report.json", system.report);
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : system.features) feats.push_back(f.name);
  write_json(dir / "system.json", {{"label", system.label},
                                   {"with_dl", system.with_dl},
                                   {"val_mae", system.val_mae},
                                   {"seed", system.seed},
                                   {"features", feats}});
}

PredictionSystem read_bundle(const std::filesystem::path& dir) {
  const auto meta = read_json(dir / "system.json");
  auto model = ml::FittedModel::from_json(read_json(dir / "model.json"));
  const auto fs = features::read_feature_set(dir / "features.json");
  PredictionSystem sys{meta.at("label").get<std::string>(),
                       std::move(model),
                       {},
                       meta.at("with_dl").get<bool>(),
                       meta.at("val_mae").get<double>(),
                       meta.at("seed").get<std::uint64_t>(),
                       TrainingConfig::from_json(read_json(dir / "config.json")),
                       {},
                       read_json(dir / "validation_report.json")};
  std::vector<std::string> used;
  for (const auto& name : sys.model.feature_names()) {
    if (name == kDlColumn) continue;
    const auto it = std::find_if(fs.state.accepted.begin(), fs.state.accepted.end(),
                                 [&](const features::FeatureRecord& r) { return r.feature.name == name; });
    if (it == fs.state.accepted.end())
      throw std::runtime_error("model predictor '" + name + "' is not an accepted feature in the bundle");
    sys.features.push_back(it->feature);
    used.push_back(name);
  }
  const bool model_has_dl = std::find(sys.model.feature_names().begin(), sys.model.feature_names().end(),
                                      std::string(kDlColumn)) != sys.model.feature_names().end();
  if (model_has_dl != sys.with_dl)
    throw std::runtime_error("bundle DL flag disagrees with the model's predictors");
  sys.matrix = fs.state.matrix.restricted_to(used);
  return sys;
}

Prediction predict(const PredictionSystem& system, const ImageRecord& image, std::optional<double> dl_score,
                   features::ApplicabilityEvaluator* evaluator, bool discretize) {
  Prediction out;
  std::vector<double> x;
  for (const auto& name : system.model.feature_names()) {
    if (name == kDlColumn) {
      if (!dl_score) throw std::invalid_argument("system " + system.label + " needs a DL score for '" + image.image_id + "'");
      x.push_back(*dl_score);
      continue;
    }
    if (system.matrix.has(name, image.image_id)) {
      out.missing_cells += system.matrix.missing(name, image.image_id);
      x.push_back(system.matrix.value(name, image.image_id));
      continue;
    }
    if (!evaluator)
      throw std::invalid_argument("no cached applicability of '" + name + "' for '" + image.image_id +
                                  "' and no evaluator available");
    const auto it = std::find_if(system.features.begin(), system.features.end(),
                                 [&](const features::Feature& f) { return f.name == name; });
    const auto v = evaluator->evaluate(*it, image);
    ++out.llm_calls;
    if (!v) ++out.missing_cells;
    x.push_back(v.value_or(0.0));
  }
  out.score = system.model.predict(x);
  if (discretize) out.discrete = clip_and_round(out.score);
  return out;
}

}  // namespace preflab::trainer
