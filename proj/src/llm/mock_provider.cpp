#include <sstream>

#include "preflab/llm/payload.hpp"
#include "preflab/llm/provider.hpp"

namespace preflab::llm {

namespace {
std::int64_t word_count(const std::string& s) {
  std::istringstream in(s);
  std::int64_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}
}  // namespace

MockProvider::MockProvider(std::vector<ScriptRule> script, MockOracle oracle)
    : script_(std::move(script)), oracle_(std::move(oracle)) {}

ChatResponse MockProvider::send(const ChatRequest& request, const RoleConfig& config) {
  ++calls_;
  const std::string prompt = request.flattened();
  ChatResponse resp;
  bool matched = false;
  for (const auto& rule : script_) {
    if (prompt.find(rule.pattern) != std::string::npos) {
      resp.text = rule.reply;
      matched = true;
      break;
    }
  }
  if (!matched && oracle_) {
    if (auto r = oracle_(request, config)) {
      resp.text = *r;
      matched = true;
    }
  }
  if (!matched) resp.text = kMockDefault;
  resp.usage = {word_count(prompt), word_count(resp.text)};
  resp.trace.provider = name();
  resp.trace.model_id = config.model_id;
  return resp;
}

}  // namespace preflab::llm
