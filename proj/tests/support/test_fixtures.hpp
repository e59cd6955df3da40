#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "preflab/core/dataset.hpp"
#include "preflab/core/random.hpp"

namespace preflab::testing {

inline std::string image_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%03zu", i);
  return buf;
}

/// Random dataset with categories in rotation and ratings on the grid.
inline Dataset make_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ImageRecord> images;
  std::vector<RatingSample> ratings;
  for (std::size_t i = 0; i < n; ++i) {
    ImageRecord rec;
    rec.image_id = image_id(i);
    rec.category = static_cast<Category>(i % 5);
    rec.rating_class = static_cast<RatingClass>(rng.below(3));
    rec.uri = "images/" + rec.image_id + ".jpg";
    images.push_back(rec);
    ratings.push_back({rec.image_id, 1.0 + 0.5 * static_cast<double>(rng.below(9))});
  }
  return Dataset(std::move(images), std::move(ratings));
}

}  // namespace preflab::testing
