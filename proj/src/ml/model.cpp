#include "preflab/ml/model.hpp"

#include <sstream>
#include <stdexcept>

namespace preflab::ml {

using nlohmann::json;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ols:
      return "ols";
    case ModelKind::Ridge:
      return "ridge";
    case ModelKind::Gbr:
      return "gbr";
    case ModelKind::Rfr:
      return "rfr";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "ols" || s == "lr") return ModelKind::Ols;
  if (s == "ridge" || s == "rr") return ModelKind::Ridge;
  if (s == "gbr") return ModelKind::Gbr;
  if (s == "rfr") return ModelKind::Rfr;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

namespace {

json max_features_to_json(const MaxFeatures& m) {
  switch (m.rule) {
    case MaxFeatures::Rule::All:
      return nullptr;
    case MaxFeatures::Rule::Sqrt:
      return "sqrt";
    case MaxFeatures::Rule::Fraction:
      return m.fraction;
  }
  return nullptr;
}

MaxFeatures max_features_from_json(const json& j) {
  if (j.is_null()) return {};
  if (j.is_string()) {
    if (j.get<std::string>() != "sqrt") throw std::invalid_argument("max_features string must be \"sqrt\"");
    return MaxFeatures::sqrt();
  }
  return MaxFeatures::of(j.get<double>());
}

}  // namespace

json hyperparameters_to_json(const Hyperparameters& h) {
  struct Visitor {
    json operator()(std::monostate) const { return json::object(); }
    json operator()(const RidgeParams& p) const { return {{"alpha", p.alpha}}; }
    json operator()(const GbrParams& p) const {
      return {{"n_estimators", p.n_estimators},
              {"learning_rate", p.learning_rate},
              {"max_depth", p.max_depth},
              {"min_samples_leaf", p.min_samples_leaf},
              {"subsample", p.subsample}};
    }
    json operator()(const RfrParams& p) const {
      return {{"n_estimators", p.n_estimators},
              {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
              {"min_samples_leaf", p.min_samples_leaf},
              {"max_features", max_features_to_json(p.max_features)},
              {"bootstrap", p.bootstrap}};
    }
  };
  return std::visit(Visitor{}, h);
}

Hyperparameters hyperparameters_from_json(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::Ols:
      return std::monostate{};
    case ModelKind::Ridge:
      return RidgeParams{j.value("alpha", 1.0)};
    case ModelKind::Gbr: {
      GbrParams p;
      p.n_estimators = j.value("n_estimators", p.n_estimators);
      p.learning_rate = j.value("learning_rate", p.learning_rate);
      p.max_depth = j.value("max_depth", p.max_depth);
      p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
      p.subsample = j.value("subsample", p.subsample);
      return p;
    }
    case ModelKind::Rfr: {
      RfrParams p;
      p.n_estimators = j.value("n_estimators", p.n_estimators);
      if (j.contains("max_depth") && !j["max_depth"].is_null()) p.max_depth = j["max_depth"].get<int>();
      p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
      if (j.contains("max_features")) p.max_features = max_features_from_json(j["max_features"]);
      p.bootstrap = j.value("bootstrap", p.bootstrap);
      return p;
    }
  }
  throw std::invalid_argument("unknown model kind");
}

std::string describe(const Hyperparameters& h) {
  if (std::holds_alternative<std::monostate>(h)) return "{}";
  return hyperparameters_to_json(h).dump();
}

FittedModel::FittedModel(ModelKind kind, std::vector<std::string> feature_names, Hyperparameters hyper,
                         std::variant<LinearParams, TreeEnsemble> params, std::uint64_t seed)
    : kind_(kind), feature_names_(std::move(feature_names)), hyper_(std::move(hyper)),
      params_(std::move(params)), seed_(seed) {
  const bool linear_kind = kind_ == ModelKind::Ols || kind_ == ModelKind::Ridge;
  if (linear_kind != is_linear()) throw std::invalid_argument("model kind does not match its parameters");
  if (is_linear() && linear().coefficients.size() != feature_names_.size())
    throw std::invalid_argument("coefficient count does not match feature count");
}

double FittedModel::predict(std::span<const double> x) const {
  if (x.size() != feature_names_.size())
    throw std::invalid_argument("predict: expected " + std::to_string(feature_names_.size()) + " features, got " +
                                std::to_string(x.size()));
  if (is_linear()) {
    const auto& lp = linear();
    double s = lp.intercept;
    for (std::size_t i = 0; i < x.size(); ++i) s += lp.coefficients[i] * x[i];
    return s;
  }
  const auto& ens = ensemble();
  double s = 0.0;
  for (const auto& t : ens.trees) s += t.predict(x);
  if (ens.average) return ens.trees.empty() ? 0.0 : s / static_cast<double>(ens.trees.size());
  return ens.base + ens.shrinkage * s;
}

std::vector<double> FittedModel::predict(const DesignMatrix& X) const {
  if (X.columns() != feature_names_)
    throw std::invalid_argument("predict: design matrix columns do not match the model's features");
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict(X.row(r));
  return out;
}

json FittedModel::to_json() const {
  json j;
  j["format"] = "preflab-model/1";
  j["kind"] = to_string(kind_);
  j["feature_names"] = feature_names_;
  j["hyperparameters"] = hyperparameters_to_json(hyper_);
  j["seed"] = seed_;
  if (is_linear()) {
    const auto& lp = linear();
    j["parameters"] = {{"intercept", lp.intercept},
                       {"coefficients", lp.coefficients},
                       {"rank_deficient", lp.rank_deficient}};
  } else {
    const auto& ens = ensemble();
    json trees = json::array();
    for (const auto& t : ens.trees) {
      json nodes = json::array();
      for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
      trees.push_back(std::move(nodes));
    }
    j["parameters"] = {{"base", ens.base},
                       {"shrinkage", ens.shrinkage},
                       {"average", ens.average},
                       {"node_layout", {"feature", "threshold", "left", "right", "value"}},
                       {"trees", std::move(trees)}};
  }
  return j;
}

FittedModel FittedModel::from_json(const json& j) {
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  auto names = j.at("feature_names").get<std::vector<std::string>>();
  auto hyper = hyperparameters_from_json(kind, j.at("hyperparameters"));
  const auto seed = j.value("seed", std::uint64_t{0});
  const auto& p = j.at("parameters");
  if (kind == ModelKind::Ols || kind == ModelKind::Ridge) {
    LinearParams lp;
    lp.intercept = p.at("intercept").get<double>();
    lp.coefficients = p.at("coefficients").get<std::vector<double>>();
    lp.rank_deficient = p.value("rank_deficient", false);
    return FittedModel(kind, std::move(names), std::move(hyper), lp, seed);
  }
  TreeEnsemble ens;
  ens.base = p.at("base").get<double>();
  ens.shrinkage = p.at("shrinkage").get<double>();
  ens.average = p.at("average").get<bool>();
  for (const auto& tj : p.at("trees")) {
    RegressionTree t;
    for (const auto& nj : tj)
      t.nodes.push_back({nj.at(0).get<int>(), nj.at(1).get<double>(), nj.at(2).get<int>(), nj.at(3).get<int>(),
                         nj.at(4).get<double>()});
    ens.trees.push_back(std::move(t));
  }
  return FittedModel(kind, std::move(names), std::move(hyper), std::move(ens), seed);
}

}  // namespace preflab::ml
