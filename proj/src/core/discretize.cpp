#include "preflab/core/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "preflab/core/dataset.hpp"

namespace preflab {

DiscreteScore::DiscreteScore(double value) : value_(value) {
  if (!on_rating_grid(value))
    throw std::invalid_argument("value " + std::to_string(value) + " is not on the 0.5 grid");
}

DiscreteScore clip_and_round(double score) {
  if (!std::isfinite(score)) throw std::invalid_argument("clip_and_round: non-finite score");
  const double clipped = std::clamp(score, 1.0, 5.0);
  // Doubling is exact in binary, so ties in half-units are exact ties here.
  // std::nearbyint honours the default round-to-nearest-even mode.
  const double halves = std::nearbyint(clipped * 2.0);
  return DiscreteScore(halves / 2.0);
}

}  // namespace preflab
