#include "preflab/core/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "preflab/core/random.hpp"

namespace preflab {

std::size_t validation_size(std::size_t remaining) {
  return static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(remaining)));
}

std::size_t inner_validation_size(std::size_t n_train) {
  return static_cast<std::size_t>(std::lround(0.25 * static_cast<double>(n_train)));
}

namespace {

// Reorders a shuffled id list so each category is spread evenly along it;
// prefix slices then carry roughly the category proportions of the whole.
std::vector<std::string> interleave_by_category(const Dataset& dataset,
                                                const std::vector<std::string>& shuffled) {
  std::map<Category, std::size_t> totals;
  for (const auto& id : shuffled) ++totals[dataset.image(id).category];
  std::map<Category, std::size_t> seen;
  struct Keyed {
    double position;
    std::size_t order;
    std::string id;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(shuffled.size());
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    const auto cat = dataset.image(shuffled[i]).category;
    const double pos = (static_cast<double>(seen[cat]++) + 0.5) / static_cast<double>(totals[cat]);
    keyed.push_back({pos, i, shuffled[i]});
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.position != b.position ? a.position < b.position : a.order < b.order;
  });
  std::vector<std::string> out;
  out.reserve(keyed.size());
  for (auto& k : keyed) out.push_back(std::move(k.id));
  return out;
}

}  // namespace

DatasetSplit split_dataset(const Dataset& dataset, const SplitOptions& options, std::uint64_t seed) {
  if (options.n_test >= dataset.size())
    throw DataError("n_te (" + std::to_string(options.n_test) + ") must be smaller than the dataset size (" +
                    std::to_string(dataset.size()) + ")");

  Rng rng(seed);
  auto ids = dataset.ids();
  rng.shuffle(ids);
  if (options.stratify_by_category) ids = interleave_by_category(dataset, ids);

  DatasetSplit split;
  split.seed = seed;
  const std::size_t remaining = ids.size() - options.n_test;
  const std::size_t n_val = validation_size(remaining);
  const std::size_t n_train = remaining - n_val;

  auto it = ids.begin();
  split.test_ids.assign(it, it + static_cast<std::ptrdiff_t>(options.n_test));
  it += static_cast<std::ptrdiff_t>(options.n_test);
  split.val_ids.assign(it, it + static_cast<std::ptrdiff_t>(n_val));
  it += static_cast<std::ptrdiff_t>(n_val);
  split.train_ids.assign(it, ids.end());

  // Train order is already random, so the inner split is a prefix slice.
  const std::size_t n_inner_val = inner_validation_size(n_train);
  split.inner_train_ids.assign(split.train_ids.begin(),
                               split.train_ids.end() - static_cast<std::ptrdiff_t>(n_inner_val));
  split.inner_val_ids.assign(split.train_ids.end() - static_cast<std::ptrdiff_t>(n_inner_val),
                             split.train_ids.end());
  return split;
}

InnerSplit split_inner(const std::vector<std::string>& train_ids, std::uint64_t seed) {
  Rng rng(seed);
  auto ids = train_ids;
  rng.shuffle(ids);
  const std::size_t n_val = inner_validation_size(ids.size());
  InnerSplit out;
  out.train_ids.assign(ids.begin(), ids.end() - static_cast<std::ptrdiff_t>(n_val));
  out.val_ids.assign(ids.end() - static_cast<std::ptrdiff_t>(n_val), ids.end());
  return out;
}

nlohmann::json split_to_json(const DatasetSplit& split) {
  return {{"seed", split.seed},
          {"test_ids", split.test_ids},
          {"train_ids", split.train_ids},
          {"val_ids", split.val_ids},
          {"inner_train_ids", split.inner_train_ids},
          {"inner_val_ids", split.inner_val_ids}};
}

DatasetSplit split_from_json(const nlohmann::json& j) {
  DatasetSplit s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.test_ids = j.at("test_ids").get<std::vector<std::string>>();
  s.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  s.val_ids = j.at("val_ids").get<std::vector<std::string>>();
  s.inner_train_ids = j.at("inner_train_ids").get<std::vector<std::string>>();
  s.inner_val_ids = j.at("inner_val_ids").get<std::vector<std::string>>();
  return s;
}

}  // namespace preflab
