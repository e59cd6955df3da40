#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace preflab::llm {

enum class Role { Interviewer, Analyzer, FeatureGenerator, ApplicabilityEvaluator, RetryFallback };

std::string to_string(Role role);
/// Throws ConfigError for an unknown role name.
Role parse_role(const std::string& s);
const std::vector<Role>& all_roles();

struct RoleConfig {
  Role role = Role::Interviewer;
  std::string provider = "mock";
  std::string model_id = "mock";
  double temperature = 0.0;
  int max_output_tokens = 4096;

  /// Throws ConfigError when temperature < 0 or max_output_tokens <= 0.
  void validate() const;
  bool operator==(const RoleConfig&) const = default;
};

/// Image bytes as base64 with a media type. `data` may be empty for a
/// reference-only payload; providers then pass `source` as a URL.
struct ImagePayload {
  std::string media_type;
  std::string data;
  std::string source;
};

struct Turn {
  std::string speaker;  ///< "user" or "assistant"
  std::string text;
};

struct ChatRequest {
  std::string system_prompt;
  std::vector<Turn> messages;
  std::vector<ImagePayload> images;
  Role role = Role::Interviewer;

  /// System prompt and turns joined with newlines, for matching and hashing.
  std::string flattened() const;
};

struct Usage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

struct ProviderTrace {
  std::string provider;
  std::string model_id;
  std::string prompt_hash;
  int attempts = 1;
  bool fallback = false;  ///< answered by the retry_fallback model
  double latency_ms = 0.0;
};

struct ChatResponse {
  std::string text;
  Usage usage;
  ProviderTrace trace;
};

enum class ErrorKind { Transport, Provider, Timeout, Config };
std::string to_string(ErrorKind kind);

class LlmError : public std::runtime_error {
public:
  LlmError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

class ConfigError : public LlmError {
public:
  explicit ConfigError(const std::string& what) : LlmError(ErrorKind::Config, what) {}
};

struct AttemptRecord {
  std::string provider;
  std::string model_id;
  ErrorKind kind = ErrorKind::Provider;
  std::string message;
  bool fallback = false;
};

/// Every attempt on the primary and the fallback model failed.
class ExhaustedError : public LlmError {
public:
  explicit ExhaustedError(std::vector<AttemptRecord> attempts);
  const std::vector<AttemptRecord>& attempts() const { return attempts_; }

private:
  std::vector<AttemptRecord> attempts_;
};

using RoleTable = std::map<Role, RoleConfig>;

/// Parses {"interviewer": {provider, model_id, temperature, max_output_tokens}, ...}.
/// Missing fields take the defaults (temperature 0.0, 4096 tokens).
RoleTable role_table_from_json(const nlohmann::json& j);
nlohmann::json role_table_to_json(const RoleTable& table);
/// Every role mapped to one provider/model.
RoleTable uniform_role_table(const std::string& provider, const std::string& model_id);

}  // namespace preflab::llm
