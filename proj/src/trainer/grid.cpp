#include "preflab/trainer/grid.hpp"

#include <set>
#include <stdexcept>

namespace preflab::trainer {

std::string to_string(TrainingMode m) { return m == TrainingMode::Hps ? "hps" : "forward_selection"; }

TrainingMode parse_training_mode(const std::string& s) {
  if (s == "hps") return TrainingMode::Hps;
  if (s == "forward_selection" || s == "fs") return TrainingMode::ForwardSelection;
  throw std::invalid_argument("unknown training mode '" + s + "'");
}

std::vector<ml::Hyperparameters> GridRanges::points(ml::ModelKind kind) const {
  std::vector<ml::Hyperparameters> out;
  switch (kind) {
    case ml::ModelKind::Ols:
      out.emplace_back(std::monostate{});
      break;
    case ml::ModelKind::Ridge:
      for (double a : ridge_alpha) out.emplace_back(ml::RidgeParams{a});
      break;
    case ml::ModelKind::Gbr:
      for (int n : gbr_n_estimators)
        for (double lr : gbr_learning_rate)
          for (int d : gbr_max_depth)
            for (int leaf : gbr_min_samples_leaf)
              for (double sub : gbr_subsample) out.emplace_back(ml::GbrParams{n, lr, d, leaf, sub});
      break;
    case ml::ModelKind::Rfr:
      for (int n : rfr_n_estimators)
        for (const auto& d : rfr_max_depth)
          for (int leaf : rfr_min_samples_leaf)
            for (const auto& mf : rfr_max_features) out.emplace_back(ml::RfrParams{n, d, leaf, mf, true});
      break;
  }
  return out;
}

namespace {

ml::MaxFeatures max_features_from_json(const nlohmann::json& v) {
  if (v.is_string()) {
    if (v == "sqrt") return ml::MaxFeatures::sqrt();
    if (v == "all") return {};
    throw std::invalid_argument("unknown max_features rule " + v.dump());
  }
  const double f = v.get<double>();
  if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("max_features fraction must be in (0, 1]");
  return ml::MaxFeatures::of(f);
}

nlohmann::json max_features_to_json(const ml::MaxFeatures& m) {
  switch (m.rule) {
    case ml::MaxFeatures::Rule::Sqrt: return "sqrt";
    case ml::MaxFeatures::Rule::All: return "all";
    default: return m.fraction;
  }
}

template <typename T>
void take(const nlohmann::json& j, const char* key, std::vector<T>& dst) {
  if (!j.contains(key)) return;
  dst = j.at(key).get<std::vector<T>>();
  if (dst.empty()) throw std::invalid_argument(std::string("grid range '") + key + "' is empty");
}

}  // namespace

void GridRanges::apply_json(ml::ModelKind kind, const nlohmann::json& j) {
  std::set<std::string> known;
  switch (kind) {
    case ml::ModelKind::Ols: break;
    case ml::ModelKind::Ridge: known = {"alpha"}; break;
    case ml::ModelKind::Gbr: known = {"n_estimators", "learning_rate", "max_depth", "min_samples_leaf", "subsample"}; break;
    case ml::ModelKind::Rfr: known = {"n_estimators", "max_depth", "min_samples_leaf", "max_features"}; break;
  }
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw std::invalid_argument("unknown grid field '" + k + "' for " + ml::to_string(kind));
  switch (kind) {
    case ml::ModelKind::Ols: break;
    case ml::ModelKind::Ridge: take(j, "alpha", ridge_alpha); break;
    case ml::ModelKind::Gbr:
      take(j, "n_estimators", gbr_n_estimators);
      take(j, "learning_rate", gbr_learning_rate);
      take(j, "max_depth", gbr_max_depth);
      take(j, "min_samples_leaf", gbr_min_samples_leaf);
      take(j, "subsample", gbr_subsample);
      break;
    case ml::ModelKind::Rfr:
      take(j, "n_estimators", rfr_n_estimators);
      take(j, "min_samples_leaf", rfr_min_samples_leaf);
      if (j.contains("max_depth")) {
        rfr_max_depth.clear();
        for (const auto& v : j["max_depth"]) rfr_max_depth.push_back(v.is_null() ? std::nullopt : std::optional<int>(v.get<int>()));
        if (rfr_max_depth.empty()) throw std::invalid_argument("grid range 'max_depth' is empty");
      }
      if (j.contains("max_features")) {
        rfr_max_features.clear();
        for (const auto& v : j["max_features"]) rfr_max_features.push_back(max_features_from_json(v));
        if (rfr_max_features.empty()) throw std::invalid_argument("grid range 'max_features' is empty");
      }
      break;
  }
}

nlohmann::json GridRanges::to_json(ml::ModelKind kind) const {
  switch (kind) {
    case ml::ModelKind::Ols: return nlohmann::json::object();
    case ml::ModelKind::Ridge: return {{"alpha", ridge_alpha}};
    case ml::ModelKind::Gbr:
      return {{"n_estimators", gbr_n_estimators},       {"learning_rate", gbr_learning_rate},
              {"max_depth", gbr_max_depth},             {"min_samples_leaf", gbr_min_samples_leaf},
              {"subsample", gbr_subsample}};
    case ml::ModelKind::Rfr: {
      nlohmann::json depth = nlohmann::json::array(), mf = nlohmann::json::array();
      for (const auto& d : rfr_max_depth) depth.push_back(d ? nlohmann::json(*d) : nlohmann::json());
      for (const auto& m : rfr_max_features) mf.push_back(max_features_to_json(m));
      return {{"n_estimators", rfr_n_estimators}, {"max_depth", depth}, {"min_samples_leaf", rfr_min_samples_leaf},
              {"max_features", mf}};
    }
  }
  return {};
}

void TrainingConfig::validate() const {
  if (mode == TrainingMode::ForwardSelection && family != ml::ModelKind::Ols && family != ml::ModelKind::Ridge)
    throw std::invalid_argument("forward selection supports only the ols and ridge families");
  if (!(l_thre >= 0.0)) throw std::invalid_argument("training.l_thre must be >= 0");
  if (n_iter_out < 1) throw std::invalid_argument("training.n_iter_out must be >= 1");
  if (n_screened < 1) throw std::invalid_argument("training.n_screened must be >= 1");
  if (max_clusters < 1) throw std::invalid_argument("training.max_clusters must be >= 1");
  if (!(fs_ridge_alpha >= 0.0)) throw std::invalid_argument("training.fs_ridge_alpha must be >= 0");
  if (grid.points(family).empty()) throw std::invalid_argument("training grid is empty");
}

std::string family_label(ml::ModelKind kind) {
  switch (kind) {
    case ml::ModelKind::Ols: return "LR";
    case ml::ModelKind::Ridge: return "RR";
    case ml::ModelKind::Gbr: return "GBR";
    case ml::ModelKind::Rfr: return "RFR";
  }
  return "?";
}

std::string TrainingConfig::label() const {
  return std::string(mode == TrainingMode::Hps ? "HPS-" : "FS-") + family_label(family) + (with_dl ? "-withDL" : "");
}

TrainingConfig config_from_label(const std::string& label) {
  TrainingConfig c;
  std::string rest = label;
  if (rest.rfind("HPS-", 0) == 0) {
    c.mode = TrainingMode::Hps;
    rest = rest.substr(4);
  } else if (rest.rfind("FS-", 0) == 0) {
    c.mode = TrainingMode::ForwardSelection;
    rest = rest.substr(3);
  } else {
    throw std::invalid_argument("system label '" + label + "' must start with HPS- or FS-");
  }
  c.with_dl = false;
  const std::string suffix = "-withDL";
  if (rest.size() > suffix.size() && rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) == 0) {
    c.with_dl = true;
    rest.resize(rest.size() - suffix.size());
  }
  if (rest == "LR") c.family = ml::ModelKind::Ols;
  else if (rest == "RR") c.family = ml::ModelKind::Ridge;
  else if (rest == "GBR") c.family = ml::ModelKind::Gbr;
  else if (rest == "RFR") c.family = ml::ModelKind::Rfr;
  else throw std::invalid_argument("unknown model family in label '" + label + "'");
  c.validate();
  return c;
}

nlohmann::json TrainingConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"family", ml::to_string(family)},
          {"with_dl", with_dl},
          {"grid", grid.to_json(family)},
          {"n_screened", n_screened},
          {"max_clusters", max_clusters},
          {"l_thre", l_thre},
          {"n_iter_out", n_iter_out},
          {"fs_ridge_alpha", fs_ridge_alpha},
          {"workers", workers}};
}

TrainingConfig TrainingConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"mode",   "family",     "with_dl",     "grid",    "n_screened", "max_clusters",
                                           "l_thre", "n_iter_out", "fs_ridge_alpha", "workers", "label"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw std::invalid_argument("unknown training setting '" + k + "'");
  TrainingConfig c;
  if (j.contains("label")) c = config_from_label(j["label"].get<std::string>());
  if (j.contains("mode")) c.mode = parse_training_mode(j["mode"].get<std::string>());
  if (j.contains("family")) c.family = ml::parse_model_kind(j["family"].get<std::string>());
  c.with_dl = j.value("with_dl", c.with_dl);
  if (j.contains("grid")) c.grid.apply_json(c.family, j["grid"]);
  c.n_screened = j.value("n_screened", c.n_screened);
  c.max_clusters = j.value("max_clusters", c.max_clusters);
  c.l_thre = j.value("l_thre", c.l_thre);
  c.n_iter_out = j.value("n_iter_out", c.n_iter_out);
  c.fs_ridge_alpha = j.value("fs_ridge_alpha", c.fs_ridge_alpha);
  c.workers = j.value("workers", c.workers);
  c.validate();
  return c;
}

}  // namespace preflab::trainer
