#include "preflab/llm/types.hpp"

#include <sstream>

namespace preflab::llm {

namespace {
const std::vector<std::pair<Role, const char*>> kRoleNames{
    {Role::Interviewer, "interviewer"},
    {Role::Analyzer, "analyzer"},
    {Role::FeatureGenerator, "feature_generator"},
    {Role::ApplicabilityEvaluator, "applicability_evaluator"},
    {Role::RetryFallback, "retry_fallback"},
};
}  // namespace

std::string to_string(Role role) {
  for (const auto& [r, n] : kRoleNames)
    if (r == role) return n;
  throw std::logic_error("unhandled role");
}

Role parse_role(const std::string& s) {
  for (const auto& [r, n] : kRoleNames)
    if (s == n) return r;
  throw ConfigError("unknown role '" + s + "'");
}

const std::vector<Role>& all_roles() {
  static const std::vector<Role> roles = [] {
    std::vector<Role> out;
    for (const auto& [r, _] : kRoleNames) out.push_back(r);
    return out;
  }();
  return roles;
}

void RoleConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError(to_string(role) + ": temperature must be >= 0");
  if (max_output_tokens <= 0) throw ConfigError(to_string(role) + ": max_output_tokens must be > 0");
  if (provider.empty()) throw ConfigError(to_string(role) + ": provider is empty");
  if (model_id.empty()) throw ConfigError(to_string(role) + ": model_id is empty");
}

std::string ChatRequest::flattened() const {
  std::string out = system_prompt;
  for (const auto& t : messages) {
    out += '\n';
    out += t.text;
  }
  return out;
}

std::string to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Provider: return "provider";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

namespace {
std::string describe_attempts(const std::vector<AttemptRecord>& attempts) {
  std::ostringstream os;
  os << "all " << attempts.size() << " attempts failed";
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& a = attempts[i];
    os << "\n  #" << i + 1 << (a.fallback ? " [fallback] " : " ") << a.provider << "/" << a.model_id << " "
       << to_string(a.kind) << ": " << a.message;
  }
  return os.str();
}
}  // namespace

ExhaustedError::ExhaustedError(std::vector<AttemptRecord> attempts)
    : LlmError(attempts.empty() ? ErrorKind::Provider : attempts.back().kind, describe_attempts(attempts)),
      attempts_(std::move(attempts)) {}

}  // namespace preflab::llm
