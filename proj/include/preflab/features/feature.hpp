#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace preflab::features {

enum class OriginKind { ColdStart, ErrorDriven };

struct FeatureOrigin {
  OriginKind kind = OriginKind::ColdStart;
  int iteration = 0;
  bool operator==(const FeatureOrigin&) const = default;
};

/// A linguistic image property: `description` is what the applicability
/// evaluator reads.
struct Feature {
  std::string name;
  std::string description;
  FeatureOrigin origin;
  bool operator==(const Feature&) const = default;
};

enum class RejectReason { LowApplicability, LowCorrelation };

std::string to_string(OriginKind k);
OriginKind parse_origin_kind(const std::string& s);
std::string to_string(RejectReason r);
RejectReason parse_reject_reason(const std::string& s);

/// Screening statistics over the training images.
struct ScreenResult {
  bool accepted = false;
  std::optional<RejectReason> reason;
  double mean_applicability = 0.0;
  double correlation = 0.0;
  bool zero_variance = false;
  std::size_t n_used = 0;     ///< cells that entered the statistics
  std::size_t n_missing = 0;  ///< cells flagged missing and left out
  bool operator==(const ScreenResult&) const = default;
};

struct FeatureRecord {
  Feature feature;
  ScreenResult screen;
  bool operator==(const FeatureRecord&) const = default;
};

/// Lowercased with surrounding whitespace removed; names are unique under
/// this key.
std::string name_key(const std::string& name);

nlohmann::json to_json(const FeatureRecord& r);
FeatureRecord feature_record_from_json(const nlohmann::json& j);

}  // namespace preflab::features
