#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "preflab/ml/design_matrix.hpp"

namespace preflab::ml {

enum class ModelKind { Ols, Ridge, Gbr, Rfr };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);

struct RidgeParams {
  double alpha = 1.0;
  bool operator==(const RidgeParams&) const = default;
};

struct GbrParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 1;
  double subsample = 1.0;
  bool operator==(const GbrParams&) const = default;
};

/// Candidate-feature rule at each random-forest split.
struct MaxFeatures {
  enum class Rule { All, Sqrt, Fraction };
  Rule rule = Rule::All;
  double fraction = 1.0;

  /// Number of candidate features out of n_features (at least 1).
  std::size_t resolve(std::size_t n_features) const;
  static MaxFeatures sqrt() { return {Rule::Sqrt, 1.0}; }
  static MaxFeatures of(double f) { return {Rule::Fraction, f}; }
  bool operator==(const MaxFeatures&) const = default;
};

struct RfrParams {
  int n_estimators = 100;
  std::optional<int> max_depth;  ///< nullopt: unlimited
  int min_samples_leaf = 1;
  MaxFeatures max_features;
  bool bootstrap = true;
  bool operator==(const RfrParams&) const = default;
};

/// std::monostate for OLS, which has no hyperparameters.
using Hyperparameters = std::variant<std::monostate, RidgeParams, GbrParams, RfrParams>;

std::string describe(const Hyperparameters& h);

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

/// Binary regression tree; x[feature] <= threshold goes left.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;
  bool operator==(const RegressionTree&) const = default;
};

struct LinearParams {
  double intercept = 0.0;
  std::vector<double> coefficients;
  bool rank_deficient = false;
  bool operator==(const LinearParams&) const = default;
};

/// Boosted (base + shrinkage * sum) or averaged tree ensemble.
struct TreeEnsemble {
  double base = 0.0;
  double shrinkage = 1.0;
  bool average = false;
  std::vector<RegressionTree> trees;
  bool operator==(const TreeEnsemble&) const = default;
};

class FittedModel {
public:
  FittedModel(ModelKind kind, std::vector<std::string> feature_names, Hyperparameters hyper,
              std::variant<LinearParams, TreeEnsemble> params, std::uint64_t seed = 0);

  ModelKind kind() const { return kind_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Hyperparameters& hyperparameters() const { return hyper_; }
  std::uint64_t seed() const { return seed_; }

  bool is_linear() const { return std::holds_alternative<LinearParams>(params_); }
  const LinearParams& linear() const { return std::get<LinearParams>(params_); }
  const TreeEnsemble& ensemble() const { return std::get<TreeEnsemble>(params_); }

  /// x holds the named features in feature_names() order.
  double predict(std::span<const double> x) const;
  /// Throws std::invalid_argument unless X has exactly feature_names() as
  /// its columns, in order.
  std::vector<double> predict(const DesignMatrix& X) const;

  nlohmann::json to_json() const;
  static FittedModel from_json(const nlohmann::json& j);

  bool operator==(const FittedModel&) const = default;

private:
  ModelKind kind_;
  std::vector<std::string> feature_names_;
  Hyperparameters hyper_;
  std::variant<LinearParams, TreeEnsemble> params_;
  std::uint64_t seed_;
};

nlohmann::json hyperparameters_to_json(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(ModelKind kind, const nlohmann::json& j);

}  // namespace preflab::ml
