#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace preflab::ml {

/// Dense row-major sample matrix with named columns and a target vector.
class DesignMatrix {
public:
  DesignMatrix() = default;

  /// values is row-major with columns.size() entries per row. Throws
  /// std::invalid_argument on shape mismatch, duplicate column names or
  /// non-finite entries.
  DesignMatrix(std::vector<std::string> columns, std::vector<double> values, std::vector<double> target,
               std::vector<std::string> row_ids = {});

  std::size_t rows() const { return target_.size(); }
  std::size_t cols() const { return columns_.size(); }

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<double>& target() const { return target_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols(), cols());
  }
  std::vector<double> column(std::size_t c) const;

  /// Keeps the named columns, in the given order.
  DesignMatrix select_columns(const std::vector<std::string>& names) const;
  /// Keeps the given rows, in the given order.
  DesignMatrix select_rows(std::span<const std::size_t> rows) const;

  std::size_t column_index(const std::string& name) const;

private:
  std::vector<std::string> columns_;
  std::vector<double> values_;
  std::vector<double> target_;
  std::vector<std::string> row_ids_;
};

}  // namespace preflab::ml
