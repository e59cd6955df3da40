#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/core/dataset.hpp"

namespace preflab {

/// Partition of a dataset into test / train / validation, plus the inner
/// train / validation partition of the train set.
struct DatasetSplit {
  std::vector<std::string> test_ids;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> inner_train_ids;
  std::vector<std::string> inner_val_ids;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSplit&) const = default;
};

struct SplitOptions {
  std::size_t n_test = 45;
  /// Approximately preserve per-category proportions in every part.
  bool stratify_by_category = false;
};

struct InnerSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

/// Sizes used for a remaining pool of n images: val = round(n / 5).
std::size_t validation_size(std::size_t remaining);
/// inner val = round(n_train / 4).
std::size_t inner_validation_size(std::size_t n_train);

/// Uniform random partition driven solely by seed. Throws DataError when
/// n_test >= dataset size.
DatasetSplit split_dataset(const Dataset& dataset, const SplitOptions& options, std::uint64_t seed);

/// Re-partitions the train ids 3:1 with a fresh shuffle.
InnerSplit split_inner(const std::vector<std::string>& train_ids, std::uint64_t seed);

nlohmann::json split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const nlohmann::json& j);

}  // namespace preflab
