#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/core/dataset.hpp"
#include "preflab/core/discretize.hpp"
#include "preflab/core/split.hpp"
#include "preflab/features/applicability.hpp"
#include "preflab/features/feature_set.hpp"
#include "preflab/ml/model.hpp"
#include "preflab/trainer/grid.hpp"

namespace preflab::trainer {

/// A trained predictor: final model, the features it reads (with their
/// descriptions and cached applicability), and how it was chosen.
struct PredictionSystem {
  std::string label;
  ml::FittedModel model;
  std::vector<features::Feature> features;  ///< model predictors other than the DL column
  bool with_dl = false;
  double val_mae = 0.0;
  std::uint64_t seed = 0;
  TrainingConfig config;
  features::ApplicabilityMatrix matrix;  ///< rows for `features` only
  nlohmann::json report;                 ///< validation report
};

/// Screens the accepted features, then runs the configured search. With
/// no usable features the model is fitted on the DL column alone, or is a
/// constant at the train mean without DL.
PredictionSystem train_system(const features::ExplorationState& exploration, const Dataset& dataset,
                              const DatasetSplit& split, const std::map<std::string, double>* dl_scores,
                              const TrainingConfig& config, std::uint64_t seed);

/// Bundle layout: model.json, features.json (feature-set format),
/// config.json, validation_report.json, system.json.
void write_bundle(const std::filesystem::path& dir, const PredictionSystem& system,
                  const features::ExplorationState& exploration, const features::ExplorationConfig& exploration_config);

/// Throws std::runtime_error naming the missing file.
PredictionSystem read_bundle(const std::filesystem::path& dir);

struct Prediction {
  double score = 0.0;
  std::optional<DiscreteScore> discrete;
  std::size_t llm_calls = 0;
  std::size_t missing_cells = 0;
};

/// Uses cached applicability where present and asks `evaluator` for the
/// rest (missing cells read 0.0). Throws std::invalid_argument when a
/// needed value is unavailable: no evaluator for an uncached feature or no
/// DL score for a DL system.
Prediction predict(const PredictionSystem& system, const ImageRecord& image, std::optional<double> dl_score,
                   features::ApplicabilityEvaluator* evaluator, bool discretize = false);

}  // namespace preflab::trainer
