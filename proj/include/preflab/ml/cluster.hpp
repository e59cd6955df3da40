#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace preflab::ml {

using DistanceMatrix = std::vector<std::vector<double>>;

/// One agglomeration step. Cluster ids follow the usual convention: leaves
/// are 0..n-1 and the cluster created by merge k gets id n + k.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;
  /// Flat cluster label per leaf, labels numbered by first appearance.
  std::vector<int> assignment;
  std::size_t n_clusters = 0;
};

/// Merges at or below this height count as identical points and are always
/// part of the flat cut.
inline constexpr double kZeroHeight = 1e-12;

/// Average-linkage agglomerative clustering. The flat cut applies the
/// smallest number of merges that leaves at most max_clusters clusters,
/// plus every zero-height merge. Ties pick the pair with the lowest
/// smallest-member indices. Throws std::invalid_argument for a
/// non-square, non-symmetric or non-zero-diagonal matrix.
Dendrogram agglomerate(const DistanceMatrix& distances, std::size_t max_clusters);

/// Flat labels after applying the first k merges of a dendrogram.
std::vector<int> cut_after(const Dendrogram& dendrogram, std::size_t k);

/// Pairwise 1 - |pearson| distances between vectors of equal length.
/// Zero-variance vectors correlate at 0, i.e. sit at distance 1.
DistanceMatrix correlation_distance(const std::vector<std::vector<double>>& vectors);

}  // namespace preflab::ml
