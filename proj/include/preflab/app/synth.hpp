#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "preflab/app/mock_script.hpp"
#include "preflab/core/dataset.hpp"
#include "preflab/core/scores.hpp"

namespace preflab::app {

struct SynthOptions {
  std::uint64_t seed = 7;
  std::size_t n_images = 300;
  std::size_t latent_features = 3;  ///< 1..8
  double rating_noise_sd = 0.25;
  double dl_noise_sd = 0.1;
};

struct SynthImage {
  std::string image_id;
  std::vector<int> latent;  ///< 0..4 per latent feature, read as k/4
  double low_level = 0.0;   ///< L ~ N(0, 1)
  double raw_rating = 0.0;  ///< before clip_and_round
  double dl_score = 0.0;
};

/// rating = clip_and_round(3 + sum_k w_k (h_k - 0.5) + 0.5 L + noise),
/// DL score = 3 + 0.5 L + noise. The mock script answers applicability of
/// the latent features from h and also carries decoy features.
struct SynthFixture {
  SynthOptions options;
  Dataset dataset;
  PredictorScores dl_scores;
  MockScript script;
  std::vector<std::string> latent_names;
  std::vector<double> weights;
  std::vector<SynthImage> hidden;
};

SynthFixture make_synthetic(const SynthOptions& options);

/// Writes manifest.jsonl, dl_scores.jsonl, mock_script.json and latent.json.
void write_synthetic(const SynthFixture& fixture, const std::filesystem::path& dir);

}  // namespace preflab::app
