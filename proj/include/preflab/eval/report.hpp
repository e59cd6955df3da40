#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/core/scores.hpp"
#include "preflab/eval/baselines.hpp"
#include "preflab/eval/metrics.hpp"
#include "preflab/eval/wilcoxon.hpp"

namespace preflab::eval {

inline constexpr const char* kReportFormat = "preflab-report/1";

struct EvaluationInput {
  RatingsMatrix truth;
  /// Per-participant image ids to score; a participant's full truth when absent.
  std::map<std::string, std::vector<std::string>> test_ids;
  std::vector<PredictorScores> predictors;
  /// Predictor every other model is compared against; first model when empty.
  std::string baseline;
  bool discretize = true;
  /// Adds a "GIAA" predictor built from the other participants' ratings.
  bool include_giaa = false;
  Alternative alternative = Alternative::TwoSided;
};

struct ComparisonRow {
  std::string predictor;
  std::string kind;
  std::size_t participants = 0;
  double mean = 0.0;
  double std = 0.0;
  bool baseline = false;
  std::optional<WinImprovement> versus;  ///< absent for the baseline row
  std::optional<TestResult> test;        ///< paired test on per-participant MAE
};

struct BestHumanRow {
  std::string predictor;
  BestHumanWins result;
};

struct BiasRow {
  std::string predictor;
  std::string target;
  BiasResult result;
};

struct EvaluationReport {
  std::string baseline;
  bool discretized = true;
  std::string alternative = "two-sided";
  std::vector<std::string> participants;
  /// predictor -> participant -> MAE
  std::map<std::string, std::map<std::string, double>> mae;
  std::vector<ComparisonRow> table;
  /// candidate -> strata with A = baseline, B = candidate
  std::map<std::string, std::vector<RegionStratum>> regions;
  std::vector<BestHumanRow> best_human;
  std::vector<BiasRow> bias;
  std::map<std::string, double> bias_mean;

  nlohmann::json to_json() const;
  static EvaluationReport from_json(const nlohmann::json& j);
};

/// Throws std::invalid_argument on missing scores or an unknown baseline.
EvaluationReport evaluate(const EvaluationInput& input);

std::string alternative_name(Alternative a);
Alternative parse_alternative(const std::string& s);

/// Display formats shared by every text and table rendering.
std::string fmt_error(double v);    // 3 decimals
std::string fmt_percent(double v);  // fraction shown as percent, 1 decimal
std::string fmt_p(double v);        // 3 significant digits

std::string render_summary(const EvaluationReport& report);

/// Writes report.json, summary.txt, table.csv, per_participant_mae.csv,
/// regions.csv, best_human.csv and bias.csv.
void write_report(const EvaluationReport& report, const std::filesystem::path& dir);

}  // namespace preflab::eval
