#pragma once

#include <vector>

namespace preflab::eval {

inline constexpr double kAlpha = 0.05;

struct Adjusted {
  std::vector<double> p;
  std::vector<bool> significant;  ///< adjusted p < alpha
};

/// Benjamini-Hochberg step-up adjustment, returned in input order.
Adjusted bh_correct(const std::vector<double>& p, double alpha = kAlpha);

}  // namespace preflab::eval
