#include "preflab/features/candidates.hpp"

#include <cctype>
#include <sstream>

#include "preflab/features/feature.hpp"

namespace preflab::features {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// Matches "name:" / "- Name :" / "**description**:" style keys.
bool take_key(const std::string& line, const std::string& key, std::string& rest) {
  std::string s = trim(line);
  while (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == ' ')) s.erase(0, 1);
  const auto colon = s.find(':');
  if (colon == std::string::npos) return false;
  std::string k;
  for (char c : s.substr(0, colon))
    if (c != '*' && c != ' ') k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k != key) return false;
  rest = trim(s.substr(colon + 1));
  return true;
}

}  // namespace

std::vector<FeatureCandidate> parse_candidates(const std::string& reply) {
  std::vector<FeatureCandidate> out;
  std::istringstream in(reply);
  std::string line;
  bool fenced = false;
  bool have = false;
  bool in_description = false;
  FeatureCandidate cur;
  auto flush = [&] {
    cur.name = trim(cur.name);
    cur.description = trim(cur.description);
    if (have && !cur.name.empty() && !cur.description.empty()) out.push_back(cur);
    cur = {};
    have = false;
    in_description = false;
  };
  while (std::getline(in, line)) {
    if (trim(line).rfind("```", 0) == 0) {
      flush();
      fenced = !fenced;
      continue;
    }
    if (!fenced) continue;
    std::string rest;
    if (take_key(line, "name", rest)) {
      flush();
      cur.name = rest;
      have = true;
    } else if (have && take_key(line, "description", rest)) {
      cur.description = rest;
      in_description = true;
    } else if (in_description && !trim(line).empty()) {
      cur.description += " " + trim(line);
    } else if (trim(line).empty()) {
      in_description = false;
    }
  }
  flush();
  return out;
}

std::vector<FeatureCandidate> filter_candidates(std::vector<FeatureCandidate> candidates,
                                                const std::set<std::string>& taken, std::size_t limit) {
  std::vector<FeatureCandidate> out;
  std::set<std::string> seen = taken;
  for (auto& c : candidates) {
    if (out.size() >= limit) break;
    const auto key = name_key(c.name);
    if (key.empty() || key.rfind("__", 0) == 0) continue;
    if (!seen.insert(key).second) continue;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace preflab::features
