#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/features/applicability.hpp"

namespace preflab::trainer {

struct ScreenedFeatureSet {
  /// Cluster by cluster, each cluster's survivors by descending |corr|.
  std::vector<std::string> features;
  std::map<int, std::vector<std::string>> clusters;
  std::map<std::string, double> correlation;
  std::size_t n_screened = 3;

  int cluster_of(const std::string& feature) const;
  nlohmann::json to_json() const;
};

/// Clusters `accepted` on the train ids and keeps the top n_screened per
/// cluster by |corr| with y; ties keep `accepted` order.
ScreenedFeatureSet screen_features(const features::ApplicabilityMatrix& matrix, const std::vector<std::string>& accepted,
                                   const std::vector<std::string>& train_ids, const std::vector<double>& y,
                                   std::size_t n_screened, std::size_t max_clusters);

}  // namespace preflab::trainer
