#include "preflab/eval/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace preflab::eval {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::vector<double> signed_rank_magnitudes(const std::vector<double>& nonzero) {
  const std::size_t m = nonzero.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(nonzero[a]) < std::abs(nonzero[b]); });
  std::vector<double> rank(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i + 1;
    while (j < m && std::abs(nonzero[order[j]]) - std::abs(nonzero[order[i]]) <= kZeroTolerance) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = mid;
    i = j;
  }
  return rank;
}

double wilcoxon_exact_p(const std::vector<double>& ranks, double w_plus, Alternative alt) {
  // Mid-ranks are multiples of 1/2, so doubling makes them integers.
  std::vector<std::size_t> r2;
  std::size_t total = 0;
  for (double r : ranks) {
    r2.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
    total += r2.back();
  }
  std::vector<double> count(total + 1, 0.0);
  count[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t v : r2) {
    for (std::size_t s = reach + 1; s-- > 0;)
      if (count[s] != 0.0) count[s + v] += count[s];
    reach += v;
  }
  const double n_sub = std::ldexp(1.0, static_cast<int>(ranks.size()));
  const auto obs = static_cast<std::size_t>(std::llround(2.0 * w_plus));
  double upper = 0.0, lower = 0.0;
  for (std::size_t s = 0; s <= total; ++s) {
    if (s >= obs) upper += count[s];
    if (s <= obs) lower += count[s];
  }
  upper /= n_sub;
  lower /= n_sub;
  switch (alt) {
    case Alternative::Greater: return upper;
    case Alternative::Less: return lower;
    case Alternative::TwoSided: break;
  }
  return std::min(1.0, 2.0 * std::min(upper, lower));
}

double wilcoxon_normal_p(const std::vector<double>& ranks, double w_plus, Alternative alt) {
  const auto m = static_cast<double>(ranks.size());
  const double mu = m * (m + 1.0) / 4.0;
  double var = m * (m + 1.0) * (2.0 * m + 1.0) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (var <= 0.0) return 1.0;
  const double sd = std::sqrt(var);
  switch (alt) {
    case Alternative::Greater: return 1.0 - normal_cdf((w_plus - mu - 0.5) / sd);
    case Alternative::Less: return normal_cdf((w_plus - mu + 0.5) / sd);
    case Alternative::TwoSided: break;
  }
  const double z = std::max(0.0, std::abs(w_plus - mu) - 0.5) / sd;
  return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, Alternative alt) {
  WilcoxonResult out;
  std::vector<double> nz;
  for (double d : diffs) {
    if (!std::isfinite(d)) throw std::invalid_argument("wilcoxon: non-finite difference");
    if (std::abs(d) <= kZeroTolerance) ++out.n_zero;
    else nz.push_back(d);
  }
  if (nz.empty()) throw std::invalid_argument("wilcoxon: all differences are zero");
  out.m = nz.size();
  const auto ranks = signed_rank_magnitudes(nz);
  for (std::size_t i = 0; i < nz.size(); ++i) (nz[i] > 0 ? out.w_plus : out.w_minus) += ranks[i];
  out.exact = out.m <= kExactLimit;
  out.p = out.exact ? wilcoxon_exact_p(ranks, out.w_plus, alt) : wilcoxon_normal_p(ranks, out.w_plus, alt);
  return out;
}

}  // namespace preflab::eval
