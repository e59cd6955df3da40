#pragma once

#include <set>
#include <string>
#include <vector>

namespace preflab::features {

struct FeatureCandidate {
  std::string name;
  std::string description;
  bool operator==(const FeatureCandidate&) const = default;
};

/// Reads `name:` / `description:` pairs from fenced code blocks. Text
/// outside fences is ignored; entries without a name or description are
/// dropped. Description continuation lines are joined with a space.
std::vector<FeatureCandidate> parse_candidates(const std::string& reply);

/// Drops candidates whose name_key is in `taken` or repeats an earlier
/// one, then keeps the first `limit`. Names starting with "__" are
/// reserved and dropped too.
std::vector<FeatureCandidate> filter_candidates(std::vector<FeatureCandidate> candidates,
                                                const std::set<std::string>& taken, std::size_t limit);

}  // namespace preflab::features
