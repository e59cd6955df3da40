#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "preflab/llm/types.hpp"

namespace preflab::llm {

/// One backend. send() makes exactly one attempt and throws LlmError on
/// failure. Implementations must be safe for concurrent calls.
class Provider {
public:
  virtual ~Provider() = default;
  virtual std::string name() const = 0;
  virtual ChatResponse send(const ChatRequest& request, const RoleConfig& config) = 0;
};

struct ScriptRule {
  std::string pattern;  ///< substring of ChatRequest::flattened()
  std::string reply;
};

using MockOracle = std::function<std::optional<std::string>(const ChatRequest&, const RoleConfig&)>;

inline constexpr const char* kMockDefault = "MOCK-DEFAULT";

/// Deterministic offline provider: first matching script rule, else the
/// oracle, else kMockDefault.
class MockProvider : public Provider {
public:
  explicit MockProvider(std::vector<ScriptRule> script = {}, MockOracle oracle = {});

  std::string name() const override { return "mock"; }
  ChatResponse send(const ChatRequest& request, const RoleConfig& config) override;

  std::size_t calls() const { return calls_.load(); }

private:
  std::vector<ScriptRule> script_;
  MockOracle oracle_;
  std::atomic<std::size_t> calls_{0};
};

enum class HttpDialect { OpenAi, Anthropic };

struct HttpProviderOptions {
  std::string name;      ///< provider key, e.g. "openai"
  HttpDialect dialect = HttpDialect::OpenAi;
  std::string base_url;  ///< scheme://host[:port][/prefix]
  std::string api_key;
  double timeout_seconds = 120.0;
};

/// Reads PREFLAB_<NAME>_API_KEY and PREFLAB_<NAME>_BASE_URL. Throws
/// ConfigError when the key is unset; the base URL falls back to the
/// dialect's public endpoint.
HttpProviderOptions http_options_from_env(const std::string& name, HttpDialect dialect);

/// Chat-completions (OpenAI-compatible) or Messages (Anthropic) over HTTP.
class HttpProvider : public Provider {
public:
  explicit HttpProvider(HttpProviderOptions options);

  std::string name() const override { return options_.name; }
  ChatResponse send(const ChatRequest& request, const RoleConfig& config) override;

  /// Request body as sent on the wire, exposed for tests.
  nlohmann::json build_body(const ChatRequest& request, const RoleConfig& config) const;

private:
  HttpProviderOptions options_;
};

}  // namespace preflab::llm
