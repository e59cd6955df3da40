#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "preflab/ml/design_matrix.hpp"
#include "preflab/ml/model.hpp"
#include "preflab/trainer/screening.hpp"

namespace preflab::trainer {

struct ForwardStep {
  std::string feature;
  int cluster = 0;
  double val_mae = 0.0;
};

struct ForwardResult {
  std::optional<ml::FittedModel> model;  ///< empty when nothing was added
  std::vector<std::string> selected;
  double val_mae = INFINITY;
  std::vector<ForwardStep> steps;
  /// Best trial of the round that stopped the search, if any.
  std::optional<ForwardStep> rejected_step;
};

struct ForwardOptions {
  ml::ModelKind kind = ml::ModelKind::Ols;
  double ridge_alpha = 1.0;
  double l_thre = 0.001;
  int n_iter_out = 10;
  /// Columns every trial model carries in addition to the selected
  /// features, e.g. the DL score.
  std::vector<std::string> base_columns;
};

/// Greedy forward selection over the screened features, at most one per
/// cluster. A round's best trial is added only if it improves the
/// validation MAE by more than l_thre; otherwise selection stops. Trial
/// ties go to the earliest feature in screened order.
ForwardResult forward_selection(const ml::DesignMatrix& train, const ml::DesignMatrix& val,
                                const ScreenedFeatureSet& screened, const ForwardOptions& options);

}  // namespace preflab::trainer
