#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/core/dataset.hpp"
#include "preflab/core/random.hpp"
#include "preflab/core/split.hpp"
#include "preflab/features/applicability.hpp"
#include "preflab/features/candidates.hpp"
#include "preflab/features/feature.hpp"
#include "preflab/ml/design_matrix.hpp"
#include "preflab/ml/model.hpp"

namespace preflab::features {

struct ExplorationConfig {
  int n_candidate = 3;
  int n_pos = 5;
  int n_neg = 5;
  int n_model = 3;
  int n_selection = 10;
  int n_iter_in = 10;
  double a_thre = 0.1;
  double r_thre = 0.1;
  int max_clusters = 20;
  /// Include the interview digest in proposal prompts.
  bool use_interview = true;
  /// After the last iteration, score accepted features on every image of
  /// the dataset so later stages never call the LLM for known images.
  bool complete_matrix = true;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  nlohmann::json to_json() const;
  static ExplorationConfig from_json(const nlohmann::json& j);
};

/// Accept iff mean applicability >= a_thre and |corr(a, y)| >= r_thre.
/// Cells with missing[i] set are left out of both statistics.
ScreenResult screen_candidate(const std::vector<double>& applicability, const std::vector<bool>& missing,
                              const std::vector<double>& y_true, double a_thre, double r_thre);

/// Rows in `ids` order, one column per feature; missing cells read 0.0.
ml::DesignMatrix applicability_design(const ApplicabilityMatrix& matrix, const std::vector<std::string>& features,
                                      const std::vector<std::string>& ids, std::vector<double> y);

/// Average-linkage clusters of the features' applicability vectors over
/// `ids`, cut at no more than max_clusters.
std::vector<int> cluster_features(const ApplicabilityMatrix& matrix, const std::vector<std::string>& features,
                                  const std::vector<std::string>& ids, std::size_t max_clusters);

/// Random subset with at most one feature per cluster and at most
/// n_selection features, returned in `features` order.
std::vector<std::string> select_model_features(const std::vector<int>& assignment,
                                               const std::vector<std::string>& features, std::size_t n_selection,
                                               Rng& rng);

struct ErrorSample {
  std::string image_id;
  double y_true = 0.0;
  double y_pred = 0.0;
  double error = 0.0;  ///< y_true - y_pred
  bool operator==(const ErrorSample&) const = default;
};

struct RankedErrors {
  std::vector<ErrorSample> positive;  ///< largest error first
  std::vector<ErrorSample> negative;  ///< most negative first
};

/// Zero errors are in neither list. Ties keep input order.
RankedErrors rank_error_samples(const std::vector<std::string>& ids, const std::vector<double>& y_true,
                                const std::vector<double>& y_pred, std::size_t n_pos, std::size_t n_neg);

enum class Tail { Positive, Negative };

/// Everything the feature generator sees for one call.
struct ProposalContext {
  Tail tail = Tail::Positive;
  bool cold_start = false;
  std::vector<ErrorSample> samples;
  std::vector<Feature> model_features;  ///< empty on cold start
  std::vector<double> coefficients;
  double intercept = 0.0;
  const ApplicabilityMatrix* matrix = nullptr;
  std::vector<Feature> accepted;
  std::vector<FeatureRecord> rejected;
  std::vector<Feature> pending;  ///< proposed earlier in this iteration
  std::string interview_digest;
  int n_candidate = 3;
};

llm::ChatRequest proposal_request(const ProposalContext& ctx, const std::vector<llm::ImagePayload>& images);

struct ExplorationState {
  std::vector<FeatureRecord> accepted;
  std::vector<FeatureRecord> rejected;
  int iteration = 0;
  std::uint64_t seed = 0;
  ApplicabilityMatrix matrix;

  std::vector<Feature> accepted_features() const;
  /// Throws std::logic_error if a name is in both pools or repeated.
  void check_invariants() const;
};

struct CallRecord {
  Tail tail = Tail::Positive;
  std::vector<std::string> image_ids;
  std::size_t parsed = 0;
  std::size_t kept = 0;
  bool failed = false;
};

struct IterationTrace {
  int iteration = 0;
  bool cold_start = false;
  std::vector<std::string> inner_train_ids;
  std::vector<std::string> inner_val_ids;
  std::vector<int> clusters;
  std::vector<ml::FittedModel> models;
  std::vector<CallRecord> calls;
  std::vector<std::string> newly_accepted;
  std::vector<std::string> newly_rejected;
};

struct ExplorationTrace {
  std::vector<IterationTrace> iterations;
};

struct ExplorationHooks {
  /// Called after each iteration's commit.
  std::function<void(const ExplorationState&, const IterationTrace&)> on_iteration;
};

/// Runs config.n_iter_in iterations of error-driven feature proposal and
/// screening. Gateway failures on proposal calls yield zero candidates for
/// that call; applicability failures follow the evaluator's strictness.
ExplorationState run_exploration(const Dataset& dataset, const DatasetSplit& split, const std::string& interview_digest,
                                 const ExplorationConfig& config, llm::Gateway& gateway,
                                 ApplicabilityEvaluator& evaluator, std::uint64_t seed,
                                 ExplorationTrace* trace = nullptr, const ExplorationHooks& hooks = {});

/// Recomputes screening for every feature in the state from its matrix
/// over the train ids. Returns one message per disagreement.
std::vector<std::string> verify_screening(const ExplorationState& state, const Dataset& dataset,
                                          const DatasetSplit& split, const ExplorationConfig& config);

}  // namespace preflab::features
