#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace preflab::eval {

/// One predictor's scores on a participant's images, with ground truth.
struct PredictionRun {
  std::string predictor_name;
  std::map<std::string, double> predicted;
  std::map<std::string, double> truth;
  bool discretized = false;

  /// Throws std::invalid_argument unless both maps have the same ids.
  void check() const;
};

/// Restricts `scores` and `truth` to `ids` (all truth ids when empty).
/// Throws std::invalid_argument naming an id without a prediction.
PredictionRun make_run(const std::string& name, const std::map<std::string, double>& scores,
                       const std::map<std::string, double>& truth, const std::vector<std::string>& ids = {});

double mae(const std::vector<double>& pred, const std::vector<double>& truth);
double mae(const PredictionRun& run);

/// clip_and_round applied to every prediction.
PredictionRun fair_discretize(const PredictionRun& run);

/// Mean |original - retest| over shared ids. Throws on id mismatch.
double retest_deviation(const std::map<std::string, double>& original, const std::map<std::string, double>& retest);

/// Two MAEs within this distance count as a tie.
inline constexpr double kTieTolerance = 1e-12;

struct WinImprovement {
  double mean = 0.0;  ///< candidate MAE mean
  double std = 0.0;   ///< sample standard deviation (n - 1)
  std::optional<double> win;  ///< wins / (wins + losses); null when every pair ties
  double imp = 0.0;           ///< mean of (e_base - e_cand) / e_base
  std::size_t wins = 0, losses = 0, ties = 0;
};

/// pairs[i] = {baseline MAE, candidate MAE} for participant i.
WinImprovement win_improvement_table(const std::vector<std::pair<double, double>>& pairs);

double sample_std(const std::vector<double>& v);

struct BestHumanWins {
  std::size_t wins = 0;
  std::size_t targets = 0;
  double rate = 0.0;
};

/// A win needs candidate MAE strictly below every human predictor's MAE
/// for that target. Targets without human runs are skipped.
BestHumanWins best_human_win_count(const std::map<std::string, double>& candidate,
                                   const std::map<std::string, std::vector<double>>& humans);

struct BiasRecord {
  double r_p = 0.0;    ///< predictor's own rating
  double r_t = 0.0;    ///< target's rating
  double r_hat = 0.0;  ///< predictor's guess of the target's rating
  double e() const { return r_hat - r_t; }
  double d() const { return r_p - r_t; }
};

struct BiasResult {
  double r = 0.0;
  bool zero_variance = false;
  std::size_t n = 0;
};

/// Pearson r between e and d. Fewer than two records count as zero variance.
BiasResult bias_correlation(const std::vector<BiasRecord>& records);

}  // namespace preflab::eval
