#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "preflab/core/random.hpp"
#include "preflab/ml/design_matrix.hpp"
#include "preflab/ml/model.hpp"

namespace preflab::ml {

/// Least squares with an intercept. Rank-deficient designs get the
/// minimum-norm coefficient vector and linear().rank_deficient is set.
/// Throws std::invalid_argument for an empty matrix.
FittedModel fit_ols(const DesignMatrix& X);

/// Minimizes ||y - Xw - b||^2 + alpha ||w||^2; the intercept b is not
/// penalized.
FittedModel fit_ridge(const DesignMatrix& X, double alpha);

struct TreeOptions {
  int max_depth = -1;  ///< < 0: unlimited
  int min_samples_leaf = 1;
  std::size_t max_features = 0;  ///< 0: all features at every split
};

/// Column-major copy of a design matrix, used by the tree builders.
struct FeatureColumns {
  explicit FeatureColumns(const DesignMatrix& X);
  std::size_t n_rows = 0;
  std::vector<std::vector<double>> cols;
};

/// Squared-error CART on the samples listed in `rows` (duplicates allowed,
/// as in a bootstrap draw). Splits scan midpoints between sorted unique
/// values; ties go to the lowest feature index, then the smallest
/// threshold. `rng` is only consulted when max_features restricts the
/// candidate set.
RegressionTree fit_tree(const FeatureColumns& X, std::span<const double> targets,
                        std::span<const std::size_t> rows, const TreeOptions& options, Rng* rng);

/// Stagewise least-squares boosting: stage 0 is the training mean, each
/// stage fits a tree to the residuals on a row subsample and is added with
/// learning-rate shrinkage.
FittedModel fit_gbr(const DesignMatrix& X, const GbrParams& params, std::uint64_t seed);

/// Training MSE after each boosting stage (index 0 is the mean-only model).
std::vector<double> staged_train_mse(const FittedModel& gbr, const DesignMatrix& X);

/// Bootstrap-aggregated trees; prediction is the mean of the trees.
FittedModel fit_rfr(const DesignMatrix& X, const RfrParams& params, std::uint64_t seed);

/// Dispatches on the hyperparameter alternative.
FittedModel fit_model(ModelKind kind, const DesignMatrix& X, const Hyperparameters& h, std::uint64_t seed);

}  // namespace preflab::ml
