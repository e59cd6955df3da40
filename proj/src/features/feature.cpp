#include "preflab/features/feature.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace preflab::features {

std::string to_string(OriginKind k) { return k == OriginKind::ColdStart ? "cold_start" : "error_driven"; }

OriginKind parse_origin_kind(const std::string& s) {
  if (s == "cold_start") return OriginKind::ColdStart;
  if (s == "error_driven") return OriginKind::ErrorDriven;
  throw std::invalid_argument("unknown feature origin '" + s + "'");
}

std::string to_string(RejectReason r) { return r == RejectReason::LowApplicability ? "low_applicability" : "low_correlation"; }

RejectReason parse_reject_reason(const std::string& s) {
  if (s == "low_applicability") return RejectReason::LowApplicability;
  if (s == "low_correlation") return RejectReason::LowCorrelation;
  throw std::invalid_argument("unknown reject reason '" + s + "'");
}

std::string name_key(const std::string& name) {
  const auto b = name.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = name.find_last_not_of(" \t\r\n");
  std::string out = name.substr(b, e - b + 1);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

nlohmann::json to_json(const FeatureRecord& r) {
  nlohmann::json j{{"name", r.feature.name},
                   {"description", r.feature.description},
                   {"origin", {{"kind", to_string(r.feature.origin.kind)}, {"iteration", r.feature.origin.iteration}}},
                   {"status", r.screen.accepted ? "accepted" : "rejected"},
                   {"mean_applicability", r.screen.mean_applicability},
                   {"correlation", r.screen.correlation},
                   {"zero_variance", r.screen.zero_variance},
                   {"n_used", r.screen.n_used},
                   {"n_missing", r.screen.n_missing}};
  if (r.screen.reason) j["reason"] = to_string(*r.screen.reason);
  return j;
}

FeatureRecord feature_record_from_json(const nlohmann::json& j) {
  FeatureRecord r;
  r.feature.name = j.at("name").get<std::string>();
  r.feature.description = j.at("description").get<std::string>();
  r.feature.origin.kind = parse_origin_kind(j.at("origin").at("kind").get<std::string>());
  r.feature.origin.iteration = j.at("origin").at("iteration").get<int>();
  const auto status = j.at("status").get<std::string>();
  if (status != "accepted" && status != "rejected") throw std::invalid_argument("unknown feature status '" + status + "'");
  r.screen.accepted = status == "accepted";
  if (j.contains("reason")) r.screen.reason = parse_reject_reason(j["reason"].get<std::string>());
  if (!r.screen.accepted && !r.screen.reason) throw std::invalid_argument("rejected feature '" + r.feature.name + "' has no reason");
  r.screen.mean_applicability = j.at("mean_applicability").get<double>();
  r.screen.correlation = j.at("correlation").get<double>();
  r.screen.zero_variance = j.value("zero_variance", false);
  r.screen.n_used = j.value("n_used", std::size_t{0});
  r.screen.n_missing = j.value("n_missing", std::size_t{0});
  return r;
}

}  // namespace preflab::features
