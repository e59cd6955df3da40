#pragma once

#include <cstddef>
#include <vector>

namespace preflab::eval {

enum class Alternative { TwoSided, Greater, Less };

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;
  std::size_t m = 0;       ///< non-zero differences
  std::size_t n_zero = 0;  ///< dropped zero differences
  bool exact = false;
};

/// Differences at or below this magnitude are treated as zero, and
/// magnitudes closer than this share a mid-rank.
inline constexpr double kZeroTolerance = 1e-12;

/// Exact up to this many non-zero differences, normal approximation above.
inline constexpr std::size_t kExactLimit = 20;

/// Signed-rank test of H0: median difference is zero. "Greater" tests for
/// positive differences. Throws std::invalid_argument when every
/// difference is zero.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, Alternative alt = Alternative::TwoSided);

/// Mid-ranks of |d| for the non-zero entries, in input order.
std::vector<double> signed_rank_magnitudes(const std::vector<double>& nonzero);

/// Exact p from the null distribution of W+ over doubled ranks.
double wilcoxon_exact_p(const std::vector<double>& ranks, double w_plus, Alternative alt);

/// Normal approximation with tie and continuity correction.
double wilcoxon_normal_p(const std::vector<double>& ranks, double w_plus, Alternative alt);

}  // namespace preflab::eval
