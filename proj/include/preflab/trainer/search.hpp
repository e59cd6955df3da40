#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "preflab/ml/design_matrix.hpp"
#include "preflab/ml/model.hpp"

namespace preflab::trainer {

/// No predictor columns and no DL column; the caller falls back to a
/// constant model.
class DegenerateInputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

double mae(const std::vector<double>& y_true, const std::vector<double>& y_pred);

struct GridEvaluation {
  ml::Hyperparameters hyperparameters;
  double val_mae = 0.0;
};

struct SearchResult {
  ml::FittedModel model;
  double val_mae = 0.0;
  std::size_t best_index = 0;
  std::vector<GridEvaluation> evaluations;  ///< grid order
};

/// Fits every grid point on `train` (same seed each) and keeps the lowest
/// validation MAE; the first point wins ties. Fits run on up to `workers`
/// threads. Throws DegenerateInputError for a zero-column design.
SearchResult hyperparameter_search(const ml::DesignMatrix& train, const ml::DesignMatrix& val, ml::ModelKind kind,
                                   const std::vector<ml::Hyperparameters>& grid, std::uint64_t seed,
                                   std::size_t workers = 1);

}  // namespace preflab::trainer
