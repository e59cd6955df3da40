#include <algorithm>
#include <chrono>
#include <cstdlib>

#include "preflab/llm/provider.hpp"
#include "preflab/util/httplib.hpp"

namespace preflab::llm {

namespace {

std::string env_name(const std::string& provider, const char* suffix) {
  std::string up = provider;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  return "PREFLAB_" + up + "_" + suffix;
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) e.prefix = url.substr(path_start);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

std::string data_url(const ImagePayload& im) {
  if (im.data.empty()) return im.source;
  return "data:" + im.media_type + ";base64," + im.data;
}

}  // namespace

HttpProviderOptions http_options_from_env(const std::string& name, HttpDialect dialect) {
  HttpProviderOptions o;
  o.name = name;
  o.dialect = dialect;
  const auto key_var = env_name(name, "API_KEY");
  const char* key = std::getenv(key_var.c_str());
  if (!key || !*key) throw ConfigError("environment variable " + key_var + " is not set");
  o.api_key = key;
  const auto url_var = env_name(name, "BASE_URL");
  const char* url = std::getenv(url_var.c_str());
  if (url && *url)
    o.base_url = url;
  else
    o.base_url = dialect == HttpDialect::OpenAi ? "https://api.openai.com" : "https://api.anthropic.com";
  return o;
}

HttpProvider::HttpProvider(HttpProviderOptions options) : options_(std::move(options)) {
  if (options_.name.empty()) throw ConfigError("http provider needs a name");
  split_url(options_.base_url);
}

nlohmann::json HttpProvider::build_body(const ChatRequest& request, const RoleConfig& config) const {
  using nlohmann::json;
  json messages = json::array();
  // Images ride on the last user turn.
  std::size_t image_turn = request.messages.size();
  for (std::size_t i = request.messages.size(); i-- > 0;)
    if (request.messages[i].speaker == "user") {
      image_turn = i;
      break;
    }

  if (options_.dialect == HttpDialect::OpenAi) {
    if (!request.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    for (std::size_t i = 0; i < request.messages.size(); ++i) {
      const auto& t = request.messages[i];
      if (i == image_turn && !request.images.empty()) {
        json parts = json::array({{{"type", "text"}, {"text", t.text}}});
        for (const auto& im : request.images)
          parts.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url(im)}}}});
        messages.push_back({{"role", t.speaker}, {"content", parts}});
      } else {
        messages.push_back({{"role", t.speaker}, {"content", t.text}});
      }
    }
    return {{"model", config.model_id},
            {"temperature", config.temperature},
            {"max_tokens", config.max_output_tokens},
            {"messages", messages}};
  }

  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    const auto& t = request.messages[i];
    json parts = json::array();
    if (i == image_turn)
      for (const auto& im : request.images) {
        if (im.data.empty())
          parts.push_back({{"type", "image"}, {"source", {{"type", "url"}, {"url", im.source}}}});
        else
          parts.push_back({{"type", "image"},
                           {"source", {{"type", "base64"}, {"media_type", im.media_type}, {"data", im.data}}}});
      }
    parts.push_back({{"type", "text"}, {"text", t.text}});
    messages.push_back({{"role", t.speaker}, {"content", parts}});
  }
  json body{{"model", config.model_id},
            {"temperature", config.temperature},
            {"max_tokens", config.max_output_tokens},
            {"messages", messages}};
  if (!request.system_prompt.empty()) body["system"] = request.system_prompt;
  return body;
}

ChatResponse HttpProvider::send(const ChatRequest& request, const RoleConfig& config) {
  const auto ep = split_url(options_.base_url);
  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration<double>(options_.timeout_seconds);
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
  client.set_connection_timeout(us);
  client.set_read_timeout(us);
  client.set_write_timeout(us);

  httplib::Headers headers;
  std::string path;
  if (options_.dialect == HttpDialect::OpenAi) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
    path = ep.prefix + "/v1/chat/completions";
  } else {
    headers.emplace("x-api-key", options_.api_key);
    headers.emplace("anthropic-version", "2023-06-01");
    path = ep.prefix + "/v1/messages";
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto res = client.Post(path, headers, build_body(request, config).dump(), "application/json");
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!res) {
    const auto err = res.error();
    const bool timed_out =
        err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= 0.9 * options_.timeout_seconds);
    throw LlmError(timed_out ? ErrorKind::Timeout : ErrorKind::Transport, httplib::to_string(err));
  }
  if (res->status == 408 || res->status == 504) throw LlmError(ErrorKind::Timeout, "HTTP " + std::to_string(res->status));
  if (res->status < 200 || res->status >= 300)
    throw LlmError(ErrorKind::Provider, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));

  ChatResponse out;
  try {
    const auto j = nlohmann::json::parse(res->body);
    if (options_.dialect == HttpDialect::OpenAi) {
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      if (j.contains("usage")) {
        out.usage.input_tokens = j["usage"].value("prompt_tokens", 0);
        out.usage.output_tokens = j["usage"].value("completion_tokens", 0);
      }
    } else {
      for (const auto& part : j.at("content"))
        if (part.value("type", "") == "text") out.text += part.at("text").get<std::string>();
      if (j.contains("usage")) {
        out.usage.input_tokens = j["usage"].value("input_tokens", 0);
        out.usage.output_tokens = j["usage"].value("output_tokens", 0);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw LlmError(ErrorKind::Provider, std::string("malformed response: ") + e.what());
  }
  out.trace.provider = options_.name;
  out.trace.model_id = config.model_id;
  return out;
}

}  // namespace preflab::llm
