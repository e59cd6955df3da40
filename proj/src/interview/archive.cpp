#include "preflab/interview/archive.hpp"

#include <fstream>
#include <sstream>

namespace preflab::interview {

void validate_participant_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") throw ValidationError("invalid participant id '" + id + "'");
  for (unsigned char c : id)
    if (!(std::isalnum(c) || c == '-' || c == '_' || c == '.'))
      throw ValidationError("participant id '" + id + "' may only use letters, digits, '-', '_' and '.'");
}

std::filesystem::path archive_path(const std::filesystem::path& root, const std::string& participant, ThemeName theme) {
  validate_participant_id(participant);
  return root / participant / (to_string(theme) + ".json");
}

std::filesystem::path write_archive(const std::filesystem::path& root, const InterviewDataContainer& c) {
  const auto path = archive_path(root, c.participant_id, c.theme.name);
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    nlohmann::json j = to_json(c);
    j["format"] = "preflab-interview/1";
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
  return path;
}

InterviewDataContainer read_archive(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read interview archive " + file.string());
  return container_from_json(nlohmann::json::parse(in));
}

std::vector<InterviewDataContainer> load_participant_archives(const std::filesystem::path& root,
                                                              const std::string& participant) {
  std::vector<InterviewDataContainer> out;
  for (ThemeName t : all_theme_names()) {
    const auto p = archive_path(root, participant, t);
    if (std::filesystem::exists(p)) out.push_back(read_archive(p));
  }
  return out;
}

std::string interview_digest(const std::vector<InterviewDataContainer>& archives) {
  std::ostringstream os;
  for (const auto& c : archives) {
    os << "## " << to_string(c.theme.name) << "\n";
    for (const auto& a : c.analyses) {
      if (a.degraded) continue;
      os << "- " << a.summary;
      if (!a.insights_hypotheses.empty()) os << " (" << a.insights_hypotheses << ")";
      os << "\n";
    }
    if (c.summary) os << "Summary comment: " << c.summary->text << "\n";
  }
  return os.str();
}

}  // namespace preflab::interview
