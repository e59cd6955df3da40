#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "preflab/interview/container.hpp"

namespace preflab::interview {

/// Participant ids become directory names: letters, digits, '-', '_' and
/// '.' only, and not "." or "..". Throws ValidationError otherwise.
void validate_participant_id(const std::string& id);

std::filesystem::path archive_path(const std::filesystem::path& root, const std::string& participant, ThemeName theme);

/// Writes the container snapshot atomically (temp file + rename).
std::filesystem::path write_archive(const std::filesystem::path& root, const InterviewDataContainer& c);
InterviewDataContainer read_archive(const std::filesystem::path& file);

/// All archived themes of one participant, in theme order. Missing themes
/// are skipped.
std::vector<InterviewDataContainer> load_participant_archives(const std::filesystem::path& root,
                                                              const std::string& participant);

/// Analyzer summaries and summary comments as plain text, for use as
/// reasoning context in feature proposals.
std::string interview_digest(const std::vector<InterviewDataContainer>& archives);

}  // namespace preflab::interview
