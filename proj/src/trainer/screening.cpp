#include "preflab/trainer/screening.hpp"

#include <algorithm>
#include <cmath>

#include "preflab/features/exploration.hpp"
#include "preflab/ml/stats.hpp"

namespace preflab::trainer {

int ScreenedFeatureSet::cluster_of(const std::string& feature) const {
  for (const auto& [c, names] : clusters)
    if (std::find(names.begin(), names.end(), feature) != names.end()) return c;
  throw std::out_of_range("feature '" + feature + "' was not screened");
}

nlohmann::json ScreenedFeatureSet::to_json() const {
  nlohmann::json cl = nlohmann::json::object();
  for (const auto& [c, names] : clusters) cl[std::to_string(c)] = names;
  return {{"features", features}, {"clusters", cl}, {"correlation", correlation}, {"n_screened", n_screened}};
}

ScreenedFeatureSet screen_features(const features::ApplicabilityMatrix& matrix, const std::vector<std::string>& accepted,
                                   const std::vector<std::string>& train_ids, const std::vector<double>& y,
                                   std::size_t n_screened, std::size_t max_clusters) {
  ScreenedFeatureSet out;
  out.n_screened = n_screened;
  if (accepted.empty()) return out;
  const auto assignment = features::cluster_features(matrix, accepted, train_ids, max_clusters);
  std::map<int, std::vector<std::size_t>> members;
  std::vector<double> abs_r(accepted.size());
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    members[assignment[i]].push_back(i);
    const auto r = train_ids.size() >= 2 ? ml::pearson(matrix.row(accepted[i], train_ids), y).r : 0.0;
    out.correlation[accepted[i]] = r;
    abs_r[i] = std::abs(r);
  }
  for (auto& [c, idx] : members) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return abs_r[a] > abs_r[b]; });
    if (idx.size() > n_screened) idx.resize(n_screened);
    for (auto i : idx) {
      out.clusters[c].push_back(accepted[i]);
      out.features.push_back(accepted[i]);
    }
  }
  return out;
}

}  // namespace preflab::trainer
