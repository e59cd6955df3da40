#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/ml/model.hpp"

namespace preflab::trainer {

enum class TrainingMode { Hps, ForwardSelection };

std::string to_string(TrainingMode m);
TrainingMode parse_training_mode(const std::string& s);

/// Search ranges per model family. Points enumerate with the first field
/// outermost, values in listed order.
struct GridRanges {
  std::vector<int> gbr_n_estimators{100, 300, 500};
  std::vector<double> gbr_learning_rate{0.05, 0.1};
  std::vector<int> gbr_max_depth{2, 3, 4};
  std::vector<int> gbr_min_samples_leaf{1, 3, 5};
  std::vector<double> gbr_subsample{0.8, 1.0};

  std::vector<double> ridge_alpha{0.5, 1.0, 2.0, 4.0};

  std::vector<int> rfr_n_estimators{200, 500};
  std::vector<std::optional<int>> rfr_max_depth{std::nullopt, 4, 6, 8};
  std::vector<int> rfr_min_samples_leaf{1, 2, 4};
  std::vector<ml::MaxFeatures> rfr_max_features{ml::MaxFeatures::sqrt(), ml::MaxFeatures::of(0.3),
                                                ml::MaxFeatures::of(0.5)};

  /// Canonical enumeration for one family; OLS yields one empty point.
  std::vector<ml::Hyperparameters> points(ml::ModelKind kind) const;

  /// Overrides ranges of `kind` from {"field": [values...]}. Unknown
  /// fields throw std::invalid_argument.
  void apply_json(ml::ModelKind kind, const nlohmann::json& j);
  nlohmann::json to_json(ml::ModelKind kind) const;
};

struct TrainingConfig {
  TrainingMode mode = TrainingMode::Hps;
  ml::ModelKind family = ml::ModelKind::Gbr;
  bool with_dl = true;
  GridRanges grid;
  std::size_t n_screened = 3;
  std::size_t max_clusters = 20;
  double l_thre = 0.001;
  int n_iter_out = 10;
  /// Ridge penalty used when forward selection runs with the ridge family.
  double fs_ridge_alpha = 1.0;
  std::size_t workers = 4;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  /// "HPS-GBR-withDL", "FS-LR", ...
  std::string label() const;
  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& j);
};

/// Label in the form used by result tables: LR, RR, RFR, GBR.
std::string family_label(ml::ModelKind kind);
/// Inverse of TrainingConfig::label(). Throws std::invalid_argument.
TrainingConfig config_from_label(const std::string& label);

}  // namespace preflab::trainer
