#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "preflab/llm/types.hpp"

namespace preflab::llm {

std::string base64_encode(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

/// Media type from the file extension (jpeg, png, webp, gif). Throws
/// std::invalid_argument for anything else.
std::string media_type_for(const std::filesystem::path& path);

/// Reads a local image into a payload. http(s) URIs become reference-only
/// payloads. Relative paths resolve against base_dir. Throws
/// std::runtime_error when the file cannot be read.
ImagePayload load_image_payload(const std::string& uri, const std::filesystem::path& base_dir = {});

/// Reference-only payload carrying just the locator.
ImagePayload reference_payload(const std::string& uri);

/// Stable hash over everything that determines a reply: role settings,
/// system prompt, turns and image digests.
std::string prompt_hash(const ChatRequest& request, const RoleConfig& config);

}  // namespace preflab::llm
