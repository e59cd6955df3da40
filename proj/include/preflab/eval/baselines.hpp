#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/eval/metrics.hpp"
#include "preflab/eval/wilcoxon.hpp"

namespace preflab::eval {

/// participant -> image_id -> rating
using RatingsMatrix = std::map<std::string, std::map<std::string, double>>;

/// Mean of every other participant's rating per image of the target, then
/// discretized. Throws std::invalid_argument with fewer than two
/// participants or when no other participant rated one of the images.
PredictionRun giaa_baseline(const RatingsMatrix& ratings, const std::string& target);

struct TestResult {
  double statistic = 0.0;  ///< W+
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
  /// "A" or "B" names the system with smaller errors when significant, "-" otherwise.
  std::string direction = "-";
};

struct RegionStratum {
  double rating = 0.0;
  std::vector<double> deltas;  ///< |e_A| - |e_B|
  std::size_t n = 0;
  double median = 0.0;
  double mean = 0.0;
  std::optional<TestResult> test;
  /// Why the test was not run: "n<2" or "all_zero".
  std::string skipped;
};

/// The nine ground-truth values 1.0, 1.5, ..., 5.0.
std::vector<double> rating_values();

double median(std::vector<double> v);

/// pairs[i] holds (A, B) runs for one participant over the same ids and
/// truth. Samples are pooled and stratified by ground truth; tested strata
/// share one BH correction. Always returns nine strata.
std::vector<RegionStratum> regionwise_diff(const std::vector<std::pair<PredictionRun, PredictionRun>>& pairs,
                                           Alternative alt = Alternative::TwoSided);
std::vector<RegionStratum> regionwise_diff(const PredictionRun& a, const PredictionRun& b,
                                           Alternative alt = Alternative::TwoSided);

nlohmann::json to_json(const TestResult& t);
TestResult test_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RegionStratum& s);
RegionStratum region_stratum_from_json(const nlohmann::json& j);

}  // namespace preflab::eval
