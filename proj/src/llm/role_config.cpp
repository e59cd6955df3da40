#include "preflab/llm/types.hpp"

namespace preflab::llm {

RoleTable role_table_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("roles: expected an object keyed by role name");
  RoleTable table;
  for (const auto& [key, value] : j.items()) {
    RoleConfig cfg;
    cfg.role = parse_role(key);
    if (!value.is_object()) throw ConfigError("roles." + key + ": expected an object");
    try {
      cfg.provider = value.value("provider", cfg.provider);
      cfg.model_id = value.value("model_id", cfg.model_id);
      cfg.temperature = value.value("temperature", cfg.temperature);
      cfg.max_output_tokens = value.value("max_output_tokens", cfg.max_output_tokens);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("roles." + key + ": " + e.what());
    }
    if (value.contains("api_key")) throw ConfigError("roles." + key + ": credentials belong in environment variables");
    cfg.validate();
    table[cfg.role] = cfg;
  }
  return table;
}

nlohmann::json role_table_to_json(const RoleTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [role, cfg] : table)
    j[to_string(role)] = {{"provider", cfg.provider},
                          {"model_id", cfg.model_id},
                          {"temperature", cfg.temperature},
                          {"max_output_tokens", cfg.max_output_tokens}};
  return j;
}

RoleTable uniform_role_table(const std::string& provider, const std::string& model_id) {
  RoleTable table;
  for (Role r : all_roles()) {
    RoleConfig cfg;
    cfg.role = r;
    cfg.provider = provider;
    cfg.model_id = model_id;
    table[r] = cfg;
  }
  return table;
}

}  // namespace preflab::llm
