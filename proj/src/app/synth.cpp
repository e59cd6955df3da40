#include "preflab/app/synth.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "preflab/core/discretize.hpp"
#include "preflab/core/random.hpp"

namespace preflab::app {

namespace {

const std::vector<features::FeatureCandidate>& latent_catalog() {
  static const std::vector<features::FeatureCandidate> c = {
      {"warm_light", "The scene is lit by warm, golden light."},
      {"open_horizon", "A wide, open horizon is visible."},
      {"animal_present", "An animal is clearly visible."},
      {"symmetric_layout", "The composition is close to mirror-symmetric."},
      {"vivid_color", "Colors are vivid and strongly saturated."},
      {"still_water", "Calm, still water is visible."},
      {"soft_focus", "The background is softly out of focus."},
      {"human_figure", "A person is part of the scene."}};
  return c;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

SynthFixture make_synthetic(const SynthOptions& o) {
  if (o.latent_features < 1 || o.latent_features > latent_catalog().size())
    throw std::invalid_argument(fmt::format("latent features must be 1..{}", latent_catalog().size()));
  if (o.n_images < 2) throw std::invalid_argument("synthetic fixture needs at least 2 images");

  SynthFixture fx;
  fx.options = o;
  const std::size_t k = o.latent_features;
  for (std::size_t i = 0; i < k; ++i) {
    fx.latent_names.push_back(latent_catalog()[i].name);
    fx.weights.push_back(std::max(0.4, 1.2 - 0.2 * static_cast<double>(i)));
  }

  Rng rng(o.seed);
  std::vector<ImageRecord> images;
  std::vector<RatingSample> ratings;
  auto& table = fx.script.applicability;
  fx.dl_scores.predictor_name = "DL";
  fx.dl_scores.provenance = "synthetic low-level component plus noise";
  auto& dl = fx.dl_scores.by_participant[kDefaultParticipant];
  for (std::size_t i = 0; i < o.n_images; ++i) {
    SynthImage img;
    img.image_id = fmt::format("img_{:03}", i);
    double r = 3.0;
    for (std::size_t f = 0; f < k; ++f) {
      img.latent.push_back(static_cast<int>(rng.below(5)));
      r += fx.weights[f] * (img.latent.back() / 4.0 - 0.5);
    }
    img.low_level = rng.normal();
    r += 0.5 * img.low_level + o.rating_noise_sd * rng.normal();
    img.raw_rating = r;
    img.dl_score = 3.0 + 0.5 * img.low_level + o.dl_noise_sd * rng.normal();
    const double rating = clip_and_round(r).value();
    const auto cat = static_cast<Category>(rng.below(5));
    const auto cls = rating <= 2.5 ? RatingClass::Low : rating >= 4.0 ? RatingClass::High : RatingClass::Middle;
    images.push_back({img.image_id, cat, cls, "images/" + img.image_id + ".jpg"});
    ratings.push_back({img.image_id, rating});
    dl[img.image_id] = img.dl_score;

    for (std::size_t f = 0; f < k; ++f) table[fx.latent_names[f]][img.image_id] = img.latent[f];
    table["has_pixels"][img.image_id] = 2;
    table["rare_object"][img.image_id] = i == 0 ? 4 : 0;
    table["coarse_texture"][img.image_id] = static_cast<int>(rng.below(5));
    table["blue_sky"][img.image_id] = static_cast<int>(rng.below(5));
    fx.hidden.push_back(std::move(img));
  }
  fx.dataset = Dataset(std::move(images), std::move(ratings));

  const std::vector<features::FeatureCandidate> decoys = {
      {"has_pixels", "The image is made of pixels."},
      {"rare_object", "A vintage typewriter is visible."},
      {"coarse_texture", "Surfaces show a coarse, grainy texture."},
      {"blue_sky", "The sky is blue."}};
  // decoys and latent features alternate so neither group comes first
  for (std::size_t i = 0; i < std::max(k, decoys.size()); ++i) {
    if (i < decoys.size()) fx.script.pool.push_back(decoys[i]);
    if (i < k) fx.script.pool.push_back(latent_catalog()[i]);
  }
  return fx;
}

void write_synthetic(const SynthFixture& fx, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "manifest.jsonl");
    serialize_dataset(fx.dataset, out);
  }
  {
    auto out = open_out(dir / "dl_scores.jsonl");
    write_predictor_scores(fx.dl_scores, out);
  }
  {
    auto out = open_out(dir / "mock_script.json");
    out << fx.script.to_json().dump(1) << "\n";
  }
  nlohmann::json latent = {{"seed", fx.options.seed},
                           {"names", fx.latent_names},
                           {"weights", fx.weights},
                           {"rating_noise_sd", fx.options.rating_noise_sd},
                           {"dl_noise_sd", fx.options.dl_noise_sd},
                           {"images", nlohmann::json::array()}};
  for (const auto& img : fx.hidden)
    latent["images"].push_back({{"image_id", img.image_id},
                                {"latent", img.latent},
                                {"low_level", img.low_level},
                                {"raw_rating", img.raw_rating},
                                {"dl_score", img.dl_score}});
  auto out = open_out(dir / "latent.json");
  out << latent.dump(1) << "\n";
}

}  // namespace preflab::app
