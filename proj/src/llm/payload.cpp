#include "preflab/llm/payload.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace preflab::llm {

std::string base64_encode(std::string_view bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string media_type_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  throw std::invalid_argument("unsupported image type: " + path.string());
}

namespace {
bool is_url(const std::string& uri) { return uri.rfind("http://", 0) == 0 || uri.rfind("https://", 0) == 0; }
}  // namespace

ImagePayload reference_payload(const std::string& uri) {
  ImagePayload p;
  p.source = uri;
  try {
    p.media_type = media_type_for(uri);
  } catch (const std::invalid_argument&) {
    p.media_type = "application/octet-stream";
  }
  return p;
}

ImagePayload load_image_payload(const std::string& uri, const std::filesystem::path& base_dir) {
  if (is_url(uri)) return reference_payload(uri);
  std::filesystem::path path(uri);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read image " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ImagePayload p;
  p.media_type = media_type_for(path);
  p.data = base64_encode(bytes);
  p.source = uri;
  return p;
}

std::string prompt_hash(const ChatRequest& request, const RoleConfig& config) {
  nlohmann::json j;
  j["model"] = config.provider + "/" + config.model_id;
  j["temperature"] = config.temperature;
  j["max_output_tokens"] = config.max_output_tokens;
  j["system"] = request.system_prompt;
  auto& turns = j["messages"] = nlohmann::json::array();
  for (const auto& t : request.messages) turns.push_back({t.speaker, t.text});
  auto& images = j["images"] = nlohmann::json::array();
  for (const auto& im : request.images) images.push_back(im.data.empty() ? im.source : sha256_hex(im.data));
  return sha256_hex(j.dump());
}

}  // namespace preflab::llm
