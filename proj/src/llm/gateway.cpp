#include "preflab/llm/gateway.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include "preflab/llm/payload.hpp"

namespace preflab::llm {

nlohmann::json LogEntry::to_json() const {
  nlohmann::json j{{"role", role},
                   {"provider", provider},
                   {"model_id", model_id},
                   {"prompt_hash", prompt_hash},
                   {"input_tokens", usage.input_tokens},
                   {"output_tokens", usage.output_tokens},
                   {"ok", ok},
                   {"fallback", fallback},
                   {"latency_ms", latency_ms}};
  if (!ok) j["error"] = error;
  return j;
}

Gateway::Gateway(RoleTable roles, GatewayOptions options) : roles_(std::move(roles)), options_(std::move(options)) {
  for (const auto& [role, cfg] : roles_) {
    if (cfg.role != role) throw ConfigError("role table entry for " + to_string(role) + " names another role");
    cfg.validate();
  }
  if (options_.max_attempts < 1) throw ConfigError("gateway.max_attempts must be >= 1");
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void Gateway::register_provider(std::shared_ptr<Provider> provider, double requests_per_minute) {
  const auto key = provider->name();
  Backend b;
  b.provider = std::move(provider);
  if (requests_per_minute > 0) b.limiter = std::make_unique<RateLimiter>(requests_per_minute);
  backends_[key] = std::move(b);
}

const RoleConfig& Gateway::role_config(Role role) const {
  auto it = roles_.find(role);
  if (it == roles_.end()) throw ConfigError("no configuration for role " + to_string(role));
  return it->second;
}

Gateway::Backend& Gateway::backend_for(const RoleConfig& config) {
  auto it = backends_.find(config.provider);
  if (it == backends_.end())
    throw ConfigError("provider '" + config.provider + "' for role " + to_string(config.role) + " is not registered");
  return it->second;
}

void Gateway::record(LogEntry entry) {
  std::lock_guard lock(log_mutex_);
  if (options_.log_path) {
    std::ofstream out(*options_.log_path, std::ios::app);
    out << entry.to_json().dump() << '\n';
  }
  log_.push_back(std::move(entry));
}

std::vector<LogEntry> Gateway::log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

ChatResponse Gateway::attempt(const ChatRequest& request, const RoleConfig& config, bool fallback) {
  auto& backend = backend_for(config);
  if (backend.limiter) backend.limiter->acquire();

  LogEntry entry;
  entry.role = to_string(request.role);
  entry.provider = config.provider;
  entry.model_id = config.model_id;
  entry.prompt_hash = prompt_hash(request, config);
  entry.fallback = fallback;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(); };
  try {
    ChatResponse resp = backend.provider->send(request, config);
    if (resp.text.empty()) throw LlmError(ErrorKind::Provider, "empty reply");
    resp.trace.provider = config.provider;
    resp.trace.model_id = config.model_id;
    resp.trace.prompt_hash = entry.prompt_hash;
    resp.trace.fallback = fallback;
    resp.trace.latency_ms = elapsed();
    entry.ok = true;
    entry.usage = resp.usage;
    entry.latency_ms = resp.trace.latency_ms;
    record(entry);
    return resp;
  } catch (const LlmError& e) {
    entry.error = to_string(e.kind()) + ": " + e.what();
    entry.latency_ms = elapsed();
    record(entry);
    throw;
  }
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  if (request.messages.empty()) throw std::invalid_argument("chat request has no messages");
  return attempt(request, role_config(request.role), false);
}

void Gateway::backoff(int attempt_index) {
  const double ms = static_cast<double>(options_.backoff_base.count()) * std::pow(options_.backoff_factor, attempt_index);
  if (ms > 0) options_.sleep(std::chrono::milliseconds(static_cast<long long>(ms)));
}

ChatResponse Gateway::complete_with_fallback(const ChatRequest& request) {
  if (request.messages.empty()) throw std::invalid_argument("chat request has no messages");
  const RoleConfig& primary = role_config(request.role);
  const RoleConfig& fallback = role_config(Role::RetryFallback);

  std::vector<AttemptRecord> failures;
  int total = 0;
  for (const auto* cfg : {&primary, &fallback}) {
    const bool is_fallback = cfg == &fallback;
    for (int i = 0; i < options_.max_attempts; ++i) {
      if (i > 0) backoff(i - 1);
      ++total;
      try {
        ChatResponse resp = attempt(request, *cfg, is_fallback);
        resp.trace.attempts = total;
        return resp;
      } catch (const ConfigError&) {
        throw;
      } catch (const LlmError& e) {
        failures.push_back({cfg->provider, cfg->model_id, e.kind(), e.what(), is_fallback});
      }
    }
  }
  throw ExhaustedError(std::move(failures));
}

}  // namespace preflab::llm
