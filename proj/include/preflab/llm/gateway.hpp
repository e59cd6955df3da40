#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "preflab/llm/provider.hpp"
#include "preflab/llm/rate_limiter.hpp"
#include "preflab/llm/types.hpp"

namespace preflab::llm {

struct GatewayOptions {
  int max_attempts = 3;  ///< per model in complete_with_fallback
  std::chrono::milliseconds backoff_base{1000};
  double backoff_factor = 2.0;
  /// Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
  /// When set, every call is appended here as one JSON line.
  std::optional<std::filesystem::path> log_path;
};

struct LogEntry {
  std::string role;
  std::string provider;
  std::string model_id;
  std::string prompt_hash;
  Usage usage;
  bool ok = false;
  bool fallback = false;
  std::string error;
  double latency_ms = 0.0;

  nlohmann::json to_json() const;
};

/// Routes requests by role to registered providers.
class Gateway {
public:
  explicit Gateway(RoleTable roles, GatewayOptions options = {});

  /// requests_per_minute <= 0 leaves the provider unthrottled.
  void register_provider(std::shared_ptr<Provider> provider, double requests_per_minute = 0.0);

  bool has_role(Role role) const { return roles_.count(role) > 0; }
  const RoleConfig& role_config(Role role) const;
  const RoleTable& roles() const { return roles_; }

  /// Single attempt on the role's configured model. Throws ConfigError for
  /// an unconfigured role or provider and LlmError for call failures.
  ChatResponse complete(const ChatRequest& request);

  /// Up to max_attempts on the primary model, then up to max_attempts on
  /// the retry_fallback model. Throws ExhaustedError listing every attempt.
  ChatResponse complete_with_fallback(const ChatRequest& request);

  std::vector<LogEntry> log() const;

private:
  struct Backend {
    std::shared_ptr<Provider> provider;
    std::unique_ptr<RateLimiter> limiter;
  };

  Backend& backend_for(const RoleConfig& config);
  ChatResponse attempt(const ChatRequest& request, const RoleConfig& config, bool fallback);
  void record(LogEntry entry);
  void backoff(int attempt_index);

  RoleTable roles_;
  GatewayOptions options_;
  std::map<std::string, Backend> backends_;
  mutable std::mutex log_mutex_;
  std::vector<LogEntry> log_;
};

}  // namespace preflab::llm
