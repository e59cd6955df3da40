#pragma once

#include <map>
#include <string>
#include <vector>

#include "preflab/features/applicability.hpp"
#include "preflab/ml/design_matrix.hpp"

namespace preflab::trainer {

/// Column holding the DL module's intermediate score.
inline constexpr const char* kDlColumn = "__dl_score";

/// Appends kDlColumn. Throws DataError naming the first row id without a
/// score.
ml::DesignMatrix assemble_with_dl(const ml::DesignMatrix& X, const std::map<std::string, double>& dl_scores);

/// Applicability columns for `features` over `ids` (missing cells read
/// 0.0), plus the DL column when dl_scores is given.
ml::DesignMatrix build_design(const features::ApplicabilityMatrix& matrix, const std::vector<std::string>& features,
                              const std::vector<std::string>& ids, const std::vector<double>& y,
                              const std::map<std::string, double>* dl_scores);

}  // namespace preflab::trainer
