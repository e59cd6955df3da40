#pragma once

#include <stdexcept>

namespace preflab {

/// A score on the 1.0..5.0 half-step grid.
class DiscreteScore {
public:
  /// Throws std::invalid_argument when value is off the grid.
  explicit DiscreteScore(double value);
  double value() const { return value_; }
  auto operator<=>(const DiscreteScore&) const = default;

private:
  double value_;
};

/// Clips to [1, 5] and rounds to the nearest multiple of 0.5; ties go to
/// the even multiple (3.25 -> 3.0, 3.75 -> 4.0). Throws
/// std::invalid_argument for non-finite input.
DiscreteScore clip_and_round(double score);

}  // namespace preflab
