#include "preflab/eval/multiple_testing.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace preflab::eval {

Adjusted bh_correct(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("bh_correct: p-value outside [0, 1]");
  Adjusted out{std::vector<double>(m), std::vector<bool>(m)};
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const std::size_t i = order[k];
    running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(k + 1));
    out.p[i] = running;
  }
  for (std::size_t i = 0; i < m; ++i) out.significant[i] = out.p[i] < alpha;
  return out;
}

}  // namespace preflab::eval
