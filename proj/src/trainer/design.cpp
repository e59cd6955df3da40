#include "preflab/trainer/design.hpp"

#include "preflab/core/dataset.hpp"
#include "preflab/features/exploration.hpp"

namespace preflab::trainer {

ml::DesignMatrix assemble_with_dl(const ml::DesignMatrix& X, const std::map<std::string, double>& dl_scores) {
  if (X.row_ids().size() != X.rows()) throw std::invalid_argument("assemble_with_dl needs row ids");
  auto columns = X.columns();
  columns.push_back(kDlColumn);
  std::vector<double> values;
  values.reserve(X.rows() * columns.size());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto& id = X.row_ids()[r];
    auto it = dl_scores.find(id);
    if (it == dl_scores.end()) throw DataError("no DL score for image '" + id + "'");
    const auto row = X.row(r);
    values.insert(values.end(), row.begin(), row.end());
    values.push_back(it->second);
  }
  return ml::DesignMatrix(std::move(columns), std::move(values), X.target(), X.row_ids());
}

ml::DesignMatrix build_design(const features::ApplicabilityMatrix& matrix, const std::vector<std::string>& features,
                              const std::vector<std::string>& ids, const std::vector<double>& y,
                              const std::map<std::string, double>* dl_scores) {
  auto X = features::applicability_design(matrix, features, ids, y);
  return dl_scores ? assemble_with_dl(X, *dl_scores) : X;
}

}  // namespace preflab::trainer
