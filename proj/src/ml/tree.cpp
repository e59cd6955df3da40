#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "preflab/ml/regressors.hpp"

namespace preflab::ml {

FeatureColumns::FeatureColumns(const DesignMatrix& X) : n_rows(X.rows()), cols(X.cols()) {
  for (std::size_t c = 0; c < X.cols(); ++c) cols[c] = X.column(c);
}

double RegressionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

int RegressionTree::depth() const {
  // Nodes are stored in preorder, so a parent always precedes its children.
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

// Presorted CART builder. Every feature keeps the node's sample slots in
// ascending feature-value order inside a shared [begin, end) segment; a
// split stably partitions each of those lists, so sorting happens once per
// tree rather than once per node.
class TreeBuilder {
public:
  TreeBuilder(const FeatureColumns& X, std::span<const double> targets, std::span<const std::size_t> rows,
              const TreeOptions& options, Rng* rng)
      : X_(X), rows_(rows), options_(options), rng_(rng), y_(rows.size()), goes_left_(rows.size()),
        scratch_(rows.size()) {
    for (std::size_t s = 0; s < rows.size(); ++s) y_[s] = targets[rows[s]];
    slots_.resize(rows.size());
    std::iota(slots_.begin(), slots_.end(), std::uint32_t{0});
    order_.resize(X.cols.size());
    for (std::size_t f = 0; f < X.cols.size(); ++f) {
      auto& ord = order_[f];
      ord = slots_;
      const auto& col = X.cols[f];
      std::stable_sort(ord.begin(), ord.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return col[rows_[a]] < col[rows_[b]]; });
    }
  }

  RegressionTree build() {
    RegressionTree tree;
    grow(tree, 0, rows_.size(), 0);
    return tree;
  }

private:
  double value(std::size_t slot, std::size_t f) const { return X_.cols[f][rows_[slot]]; }

  int grow(RegressionTree& tree, std::size_t begin, std::size_t end, int depth) {
    const auto node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    const std::size_t n = end - begin;

    double sum = 0.0, sumsq = 0.0;
    double lo = y_[slots_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_[slots_[i]];
      sum += v;
      sumsq += v * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    tree.nodes[static_cast<std::size_t>(node_index)].value = sum / static_cast<double>(n);

    const auto min_leaf = static_cast<std::size_t>(std::max(1, options_.min_samples_leaf));
    const bool depth_capped = options_.max_depth >= 0 && depth >= options_.max_depth;
    if (depth_capped || n < 2 || n < 2 * min_leaf || lo == hi || X_.cols.empty()) return node_index;

    const auto split = best_split(begin, end, sum, sumsq, min_leaf);
    if (split.feature < 0) return node_index;

    // Partition every per-feature list (and the plain slot list) stably.
    const auto f = static_cast<std::size_t>(split.feature);
    for (std::size_t i = begin; i < end; ++i) goes_left_[slots_[i]] = value(slots_[i], f) <= split.threshold;
    partition(slots_, begin, end);
    for (auto& ord : order_) partition(ord, begin, end);
    const std::size_t mid = begin + split.left_count;

    const int left = grow(tree, begin, mid, depth + 1);
    const int right = grow(tree, mid, end, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(node_index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_index;
  }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
    bool operator==(const Split&) const = default;
  };

  Split best_split(std::size_t begin, std::size_t end, double sum, double sumsq, std::size_t min_leaf) {
    const std::size_t n = end - begin;
    const std::size_t p = X_.cols.size();
    std::vector<std::size_t> features;
    if (options_.max_features > 0 && options_.max_features < p && rng_) {
      features = rng_->sample_without_replacement(p, options_.max_features);
      std::sort(features.begin(), features.end());
    } else {
      features.resize(p);
      std::iota(features.begin(), features.end(), std::size_t{0});
    }

    const double parent = sum * sum / static_cast<double>(n);
    // Rounding noise in the gains is bounded by a small multiple of the
    // node's sum of squares.
    const double tolerance = 1e-13 * sumsq;
    Split best;
    double best_gain = tolerance;
    for (auto f : features) {
      const auto& ord = order_[f];
      double left_sum = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left_sum += y_[ord[i]];
        const std::size_t k = i - begin + 1;
        const double a = value(ord[i], f);
        const double b = value(ord[i + 1], f);
        if (!(a < b)) continue;
        if (k < min_leaf) continue;
        if (n - k < min_leaf) break;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(k) +
                            right_sum * right_sum / static_cast<double>(n - k) - parent;
        // Strictly better by more than the noise floor, so near-ties keep the
        // lowest feature index and smallest threshold.
        if (gain > best_gain + (best == Split{} ? 0.0 : tolerance)) {
          best_gain = gain;
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best = {static_cast<int>(f), t, k};
        }
      }
    }
    return best;
  }

  void partition(std::vector<std::uint32_t>& list, std::size_t begin, std::size_t end) {
    std::size_t l = begin, r = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto s = list[i];
      if (goes_left_[s])
        list[l++] = s;
      else
        scratch_[r++] = s;
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
              list.begin() + static_cast<std::ptrdiff_t>(l));
  }

  const FeatureColumns& X_;
  std::span<const std::size_t> rows_;
  TreeOptions options_;
  Rng* rng_;
  std::vector<double> y_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint32_t> slots_;
  std::vector<std::vector<std::uint32_t>> order_;
};

}  // namespace

RegressionTree fit_tree(const FeatureColumns& X, std::span<const double> targets,
                        std::span<const std::size_t> rows, const TreeOptions& options, Rng* rng) {
  if (rows.empty()) throw std::invalid_argument("fit_tree: no samples");
  return TreeBuilder(X, targets, rows, options, rng).build();
}

}  // namespace preflab::ml
