#include "preflab/ml/design_matrix.hpp"

#include <cmath>
#include <unordered_set>

namespace preflab::ml {

DesignMatrix::DesignMatrix(std::vector<std::string> columns, std::vector<double> values,
                           std::vector<double> target, std::vector<std::string> row_ids)
    : columns_(std::move(columns)), values_(std::move(values)), target_(std::move(target)),
      row_ids_(std::move(row_ids)) {
  if (values_.size() != columns_.size() * target_.size())
    throw std::invalid_argument("design matrix: values do not match rows x cols");
  if (!row_ids_.empty() && row_ids_.size() != target_.size())
    throw std::invalid_argument("design matrix: row id count does not match rows");
  std::unordered_set<std::string> seen;
  for (const auto& c : columns_)
    if (!seen.insert(c).second) throw std::invalid_argument("design matrix: duplicate column '" + c + "'");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("design matrix: missing or non-finite value");
  for (double v : target_)
    if (!std::isfinite(v)) throw std::invalid_argument("design matrix: non-finite target");
}

std::vector<double> DesignMatrix::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::size_t DesignMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  throw std::invalid_argument("design matrix: no column '" + name + "'");
}

DesignMatrix DesignMatrix::select_columns(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(column_index(n));
  std::vector<double> vals;
  vals.reserve(rows() * idx.size());
  for (std::size_t r = 0; r < rows(); ++r)
    for (auto c : idx) vals.push_back(at(r, c));
  return DesignMatrix(names, std::move(vals), target_, row_ids_);
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> vals;
  std::vector<double> tgt;
  std::vector<std::string> ids;
  vals.reserve(rows.size() * cols());
  for (auto r : rows) {
    auto rr = row(r);
    vals.insert(vals.end(), rr.begin(), rr.end());
    tgt.push_back(target_[r]);
    if (!row_ids_.empty()) ids.push_back(row_ids_[r]);
  }
  return DesignMatrix(columns_, std::move(vals), std::move(tgt), std::move(ids));
}

}  // namespace preflab::ml
