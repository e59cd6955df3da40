#include "preflab/app/mock_script.hpp"

#include <fstream>
#include <memory>

#include "preflab/app/errors.hpp"

namespace preflab::app {

using nlohmann::json;

namespace {

std::string line_value(const std::string& text, const std::string& key) {
  const auto at = text.find(key);
  if (at == std::string::npos) return {};
  const auto from = at + key.size();
  const auto end = text.find('\n', from);
  return text.substr(from, end == std::string::npos ? std::string::npos : end - from);
}

}  // namespace

json MockScript::to_json() const {
  json rules_j = json::array();
  for (const auto& r : rules) rules_j.push_back({{"pattern", r.pattern}, {"reply", r.reply}});
  json pool_j = json::array();
  for (const auto& c : pool) pool_j.push_back({{"name", c.name}, {"description", c.description}});
  return {{"format", kMockScriptFormat},
          {"rules", rules_j},
          {"applicability", applicability},
          {"default_applicability", default_applicability},
          {"feature_pool", pool_j}};
}

MockScript MockScript::from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kMockScriptFormat)
    throw config_error(std::string("mock script must have format ") + kMockScriptFormat);
  MockScript s;
  try {
    for (const auto& r : j.value("rules", json::array()))
      s.rules.push_back({r.at("pattern").get<std::string>(), r.at("reply").get<std::string>()});
    s.applicability = j.value("applicability", decltype(s.applicability){});
    s.default_applicability = j.value("default_applicability", 0);
    for (const auto& c : j.value("feature_pool", json::array()))
      s.pool.push_back({c.at("name").get<std::string>(), c.at("description").get<std::string>()});
  } catch (const json::exception& e) {
    throw config_error(std::string("mock script: ") + e.what());
  }
  for (const auto& [f, row] : s.applicability)
    for (const auto& [id, v] : row)
      if (v < 0 || v > 4) throw config_error("mock script: applicability of '" + f + "' on '" + id + "' outside 0..4");
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read mock script " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw config_error(path.string() + ": " + e.what());
  }
}

std::optional<std::string> MockScript::answer(const llm::ChatRequest& request) const {
  const auto text = request.flattened();
  if (request.role == llm::Role::ApplicabilityEvaluator || request.role == llm::Role::RetryFallback) {
    const auto feature = line_value(text, "Feature name: ");
    const auto image = line_value(text, "Image ID: ");
    if (feature.empty() || image.empty()) return std::nullopt;
    auto f = applicability.find(feature);
    if (f == applicability.end()) return std::to_string(default_applicability);
    auto v = f->second.find(image);
    return std::to_string(v == f->second.end() ? default_applicability : v->second);
  }
  if (request.role == llm::Role::FeatureGenerator) {
    const auto limit_text = line_value(text, "Propose up to ");
    int limit = 3;
    try {
      if (!limit_text.empty()) limit = std::stoi(limit_text);
    } catch (const std::exception&) {
    }
    std::string out = "```\n";
    int k = 0;
    for (const auto& c : pool) {
      if (k == limit) break;
      if (text.find("`" + c.name + "`") != std::string::npos) continue;
      out += "name: " + c.name + "\ndescription: " + c.description + "\n\n";
      ++k;
    }
    return out + "```\n";
  }
  return std::nullopt;
}

std::shared_ptr<llm::MockProvider> MockScript::provider() const {
  auto self = std::make_shared<MockScript>(*this);
  return std::make_shared<llm::MockProvider>(
      rules, [self](const llm::ChatRequest& r, const llm::RoleConfig&) { return self->answer(r); });
}

}  // namespace preflab::app
