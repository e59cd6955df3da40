#pragma once

#include <span>

namespace preflab::ml {

struct Correlation {
  double r = 0.0;
  /// Set when either input has zero variance; r is then 0 by convention.
  bool zero_variance = false;
};

/// Pearson correlation. Throws std::invalid_argument on length mismatch or
/// fewer than two samples.
Correlation pearson(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);

}  // namespace preflab::ml
