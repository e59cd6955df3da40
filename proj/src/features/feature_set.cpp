#include "preflab/features/feature_set.hpp"

#include <fstream>

namespace preflab::features {

nlohmann::json feature_set_to_json(const ExplorationState& state, const ExplorationConfig& config) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto* pool : {&state.accepted, &state.rejected})
    for (const auto& r : *pool) features.push_back(to_json(r));
  return {{"format", kFeatureSetFormat},
          {"seed", state.seed},
          {"iterations", state.iteration},
          {"config", config.to_json()},
          {"missing_cells", state.matrix.missing_count()},
          {"features", features},
          {"applicability", state.matrix.to_json()}};
}

FeatureSet feature_set_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != kFeatureSetFormat)
    throw std::invalid_argument("not a feature-set file (expected format " + std::string(kFeatureSetFormat) + ")");
  FeatureSet fs;
  fs.config = ExplorationConfig::from_json(j.at("config"));
  fs.state.seed = j.at("seed").get<std::uint64_t>();
  fs.state.iteration = j.at("iterations").get<int>();
  for (const auto& f : j.at("features")) {
    auto r = feature_record_from_json(f);
    (r.screen.accepted ? fs.state.accepted : fs.state.rejected).push_back(std::move(r));
  }
  fs.state.matrix = ApplicabilityMatrix::from_json(j.at("applicability"));
  try {
    fs.state.check_invariants();
  } catch (const std::logic_error& e) {
    throw std::invalid_argument(std::string("feature-set file: ") + e.what());
  }
  return fs;
}

void write_feature_set(const std::filesystem::path& path, const ExplorationState& state,
                       const ExplorationConfig& config) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << feature_set_to_json(state, config).dump(1) << "\n";
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

FeatureSet read_feature_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature-set file " + path.string());
  return feature_set_from_json(nlohmann::json::parse(in));
}

}  // namespace preflab::features
