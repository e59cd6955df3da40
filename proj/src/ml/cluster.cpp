#include "preflab/ml/cluster.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "preflab/ml/stats.hpp"

namespace preflab::ml {

namespace {

void validate(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n) throw std::invalid_argument("distance matrix must be square");
    if (std::abs(d[i][i]) > 1e-12) throw std::invalid_argument("distance matrix must have a zero diagonal");
    for (std::size_t j = 0; j < i; ++j) {
      if (!std::isfinite(d[i][j])) throw std::invalid_argument("distance matrix has a non-finite entry");
      if (std::abs(d[i][j] - d[j][i]) > 1e-12 * std::max(1.0, std::abs(d[i][j])))
        throw std::invalid_argument("distance matrix must be symmetric");
    }
  }
}

}  // namespace

std::vector<int> cut_after(const Dendrogram& dg, std::size_t k) {
  const std::size_t n = dg.n_leaves;
  // Union-find over leaves, then relabel by first appearance.
  std::vector<std::size_t> parent(n + dg.merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < k && m < dg.merges.size(); ++m) {
    parent[find(dg.merges[m].a)] = n + m;
    parent[find(dg.merges[m].b)] = n + m;
  }
  std::vector<int> labels(n, -1);
  std::vector<int> root_label(parent.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

Dendrogram agglomerate(const DistanceMatrix& distances, std::size_t max_clusters) {
  validate(distances);
  if (max_clusters == 0) throw std::invalid_argument("max_clusters must be at least 1");
  const std::size_t n = distances.size();
  Dendrogram dg;
  dg.n_leaves = n;
  if (n == 0) return dg;

  // Lance-Williams update for average linkage. A merged cluster lives in
  // the slot of its smaller member, so slot order is smallest-member order.
  auto d = distances;
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), std::size_t{0});

  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && d[i][j] < best) {
          best = d[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    const double si = static_cast<double>(size[bi]);
    const double sj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double v = (si * d[bi][k] + sj * d[bj][k]) / (si + sj);
      d[bi][k] = d[k][bi] = v;
    }
    dg.merges.push_back({id[bi], id[bj], best, size[bi] + size[bj]});
    active[bj] = false;
    size[bi] += size[bj];
    id[bi] = n + step;
  }

  std::size_t k = n > max_clusters ? n - max_clusters : 0;
  std::size_t zero = 0;
  while (zero < dg.merges.size() && dg.merges[zero].height <= kZeroHeight) ++zero;
  k = std::max(k, zero);
  dg.assignment = cut_after(dg, k);
  dg.n_clusters = n - k;
  return dg;
}

DistanceMatrix correlation_distance(const std::vector<std::vector<double>>& vectors) {
  const std::size_t n = vectors.size();
  DistanceMatrix d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = pearson(vectors[i], vectors[j]).r;
      d[i][j] = d[j][i] = std::max(0.0, 1.0 - std::abs(r));
    }
  return d;
}

}  // namespace preflab::ml
