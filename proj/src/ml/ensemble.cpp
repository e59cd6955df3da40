#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "preflab/ml/regressors.hpp"

namespace preflab::ml {

FittedModel fit_gbr(const DesignMatrix& X, const GbrParams& params, std::uint64_t seed) {
  if (X.rows() == 0) throw std::invalid_argument("fit_gbr: empty data");
  if (params.n_estimators < 0 || !(params.learning_rate > 0.0) || !(params.subsample > 0.0) ||
      params.subsample > 1.0 || params.min_samples_leaf < 1)
    throw std::invalid_argument("fit_gbr: hyperparameters out of range");

  const std::size_t n = X.rows();
  const FeatureColumns cols(X);
  const auto& y = X.target();

  TreeEnsemble ens;
  ens.base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  ens.shrinkage = params.learning_rate;
  ens.average = false;

  std::vector<double> current(n, ens.base);
  std::vector<double> residual(n);
  const auto n_inbag = std::max<std::size_t>(1, static_cast<std::size_t>(params.subsample * static_cast<double>(n)));
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  TreeOptions opts;
  opts.max_depth = params.max_depth;
  opts.min_samples_leaf = params.min_samples_leaf;

  Rng rng(seed);
  ens.trees.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int stage = 0; stage < params.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - current[i];
    std::vector<std::size_t> rows;
    if (n_inbag < n) {
      rows = rng.sample_without_replacement(n, n_inbag);
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all_rows;
    }
    auto tree = fit_tree(cols, residual, rows, opts, nullptr);
    for (std::size_t i = 0; i < n; ++i) current[i] += ens.shrinkage * tree.predict(X.row(i));
    ens.trees.push_back(std::move(tree));
  }
  return FittedModel(ModelKind::Gbr, X.columns(), params, std::move(ens), seed);
}

std::vector<double> staged_train_mse(const FittedModel& gbr, const DesignMatrix& X) {
  if (gbr.kind() != ModelKind::Gbr) throw std::invalid_argument("staged_train_mse needs a boosted model");
  const auto& ens = gbr.ensemble();
  const std::size_t n = X.rows();
  std::vector<double> current(n, ens.base);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = X.target()[i] - current[i];
      s += d * d;
    }
    return s / static_cast<double>(n);
  };
  std::vector<double> out{mse()};
  for (const auto& tree : ens.trees) {
    for (std::size_t i = 0; i < n; ++i) current[i] += ens.shrinkage * tree.predict(X.row(i));
    out.push_back(mse());
  }
  return out;
}

std::size_t MaxFeatures::resolve(std::size_t n_features) const {
  std::size_t k = n_features;
  switch (rule) {
    case Rule::All:
      break;
    case Rule::Sqrt:
      k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
      break;
    case Rule::Fraction:
      k = static_cast<std::size_t>(fraction * static_cast<double>(n_features));
      break;
  }
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(1, n_features));
}

FittedModel fit_rfr(const DesignMatrix& X, const RfrParams& params, std::uint64_t seed) {
  if (X.rows() == 0) throw std::invalid_argument("fit_rfr: empty data");
  if (params.n_estimators < 1 || params.min_samples_leaf < 1)
    throw std::invalid_argument("fit_rfr: hyperparameters out of range");
  const std::size_t n = X.rows();
  const FeatureColumns cols(X);

  TreeOptions opts;
  opts.max_depth = params.max_depth.value_or(-1);
  opts.min_samples_leaf = params.min_samples_leaf;
  opts.max_features = X.cols() ? params.max_features.resolve(X.cols()) : 0;

  TreeEnsemble ens;
  ens.average = true;
  ens.trees.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int t = 0; t < params.n_estimators; ++t) {
    // Per-tree streams keep each tree independent of fitting order.
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    ens.trees.push_back(fit_tree(cols, X.target(), rows, opts, &rng));
  }
  return FittedModel(ModelKind::Rfr, X.columns(), params, std::move(ens), seed);
}

FittedModel fit_model(ModelKind kind, const DesignMatrix& X, const Hyperparameters& h, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::Ols:
      return fit_ols(X);
    case ModelKind::Ridge:
      return fit_ridge(X, std::get<RidgeParams>(h).alpha);
    case ModelKind::Gbr:
      return fit_gbr(X, std::get<GbrParams>(h), seed);
    case ModelKind::Rfr:
      return fit_rfr(X, std::get<RfrParams>(h), seed);
  }
  throw std::invalid_argument("unknown model kind");
}

}  // namespace preflab::ml
