#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace preflab::interview {

enum class ThemeName { PreferenceTargets, ImageEvokedReactions, PersonalTastes };

struct SubTopic {
  std::string label;
  std::string guiding_question;
  bool operator==(const SubTopic&) const = default;
};

struct Theme {
  ThemeName name = ThemeName::PreferenceTargets;
  std::vector<SubTopic> sub_topics;
  int question_budget = 0;
  bool operator==(const Theme&) const = default;
};

class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

std::string to_string(ThemeName name);
/// Throws ValidationError for anything but the three theme names.
ThemeName parse_theme_name(const std::string& s);

/// Built-in sub-topics with budgets 15, 10 and 10.
const Theme& standard_theme(ThemeName name);
const std::vector<ThemeName>& all_theme_names();

}  // namespace preflab::interview
