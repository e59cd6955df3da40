#include "preflab/app/config.hpp"

#include <fstream>
#include <set>

#include "preflab/app/errors.hpp"

namespace preflab::app {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& section) {
  if (!j.is_object()) throw config_error(section + ": expected an object");
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw config_error("unknown setting '" + (section.empty() ? k : section + "." + k) + "'");
}

GatewaySettings gateway_from_json(const json& j) {
  reject_unknown(j, {"max_attempts", "backoff_ms", "backoff_factor", "providers"}, "gateway");
  GatewaySettings g;
  g.max_attempts = j.value("max_attempts", g.max_attempts);
  g.backoff_ms = j.value("backoff_ms", g.backoff_ms);
  g.backoff_factor = j.value("backoff_factor", g.backoff_factor);
  if (g.max_attempts < 1) throw config_error("gateway.max_attempts must be >= 1");
  if (g.backoff_ms < 0) throw config_error("gateway.backoff_ms must be >= 0");
  if (!j.contains("providers")) return g;
  if (!j["providers"].is_object()) throw config_error("gateway.providers: expected an object");
  for (const auto& [name, p] : j["providers"].items()) {
    const auto where = "gateway.providers." + name;
    if (p.is_object() && p.contains("api_key")) throw config_error(where + ": credentials belong in environment variables");
    reject_unknown(p, {"dialect", "base_url", "requests_per_minute", "timeout_seconds"}, where);
    ProviderSettings ps;
    ps.dialect = p.value("dialect", ps.dialect);
    ps.base_url = p.value("base_url", ps.base_url);
    ps.requests_per_minute = p.value("requests_per_minute", ps.requests_per_minute);
    ps.timeout_seconds = p.value("timeout_seconds", ps.timeout_seconds);
    if (ps.dialect != "openai" && ps.dialect != "anthropic") throw config_error(where + ".dialect must be openai or anthropic");
    g.providers[name] = ps;
  }
  return g;
}

}  // namespace

AppConfig AppConfig::from_json(const json& j) {
  reject_unknown(j, {"seed", "split", "exploration", "training", "roles", "gateway", "evaluation", "workers"}, "");
  AppConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (c.workers < 1) throw config_error("workers must be >= 1");
    if (j.contains("split")) {
      const auto& s = j["split"];
      reject_unknown(s, {"n_test", "stratify_by_category"}, "split");
      c.split.n_test = s.value("n_test", c.split.n_test);
      c.split.stratify_by_category = s.value("stratify_by_category", c.split.stratify_by_category);
    }
    if (j.contains("exploration")) c.exploration = features::ExplorationConfig::from_json(j["exploration"]);
    if (j.contains("training")) c.training = trainer::TrainingConfig::from_json(j["training"]);
    if (j.contains("roles")) c.roles = llm::role_table_from_json(j["roles"]);
    if (j.contains("gateway")) c.gateway = gateway_from_json(j["gateway"]);
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      reject_unknown(e, {"discretize", "alternative", "include_giaa"}, "evaluation");
      c.evaluation.discretize = e.value("discretize", c.evaluation.discretize);
      c.evaluation.alternative = e.value("alternative", c.evaluation.alternative);
      c.evaluation.include_giaa = e.value("include_giaa", c.evaluation.include_giaa);
      if (c.evaluation.alternative != "two-sided" && c.evaluation.alternative != "greater" &&
          c.evaluation.alternative != "less")
        throw config_error("evaluation.alternative must be two-sided, greater or less");
    }
  } catch (const CommandError&) {
    throw;
  } catch (const json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
  return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw config_error(path.string() + ": " + e.what());
  }
  if (j.is_object() && j.value("format", "") == "preflab-run/1") return from_json(j.at("config"));
  return from_json(j);
}

json AppConfig::to_json() const {
  json providers = json::object();
  for (const auto& [name, p] : gateway.providers)
    providers[name] = {{"dialect", p.dialect},
                       {"base_url", p.base_url},
                       {"requests_per_minute", p.requests_per_minute},
                       {"timeout_seconds", p.timeout_seconds}};
  return {{"seed", seed},
          {"workers", workers},
          {"split", {{"n_test", split.n_test}, {"stratify_by_category", split.stratify_by_category}}},
          {"exploration", exploration.to_json()},
          {"training", training.to_json()},
          {"roles", llm::role_table_to_json(roles)},
          {"gateway",
           {{"max_attempts", gateway.max_attempts},
            {"backoff_ms", gateway.backoff_ms},
            {"backoff_factor", gateway.backoff_factor},
            {"providers", providers}}},
          {"evaluation",
           {{"discretize", evaluation.discretize},
            {"alternative", evaluation.alternative},
            {"include_giaa", evaluation.include_giaa}}}};
}

}  // namespace preflab::app
