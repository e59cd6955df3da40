#include "preflab/interview/themes.hpp"

namespace preflab::interview {

std::string to_string(ThemeName name) {
  switch (name) {
    case ThemeName::PreferenceTargets: return "PreferenceTargets";
    case ThemeName::ImageEvokedReactions: return "ImageEvokedReactions";
    case ThemeName::PersonalTastes: return "PersonalTastes";
  }
  throw std::logic_error("unhandled theme");
}

ThemeName parse_theme_name(const std::string& s) {
  for (ThemeName t : all_theme_names())
    if (to_string(t) == s) return t;
  throw ValidationError("unknown theme '" + s + "' (expected PreferenceTargets, ImageEvokedReactions or PersonalTastes)");
}

const std::vector<ThemeName>& all_theme_names() {
  static const std::vector<ThemeName> names{ThemeName::PreferenceTargets, ThemeName::ImageEvokedReactions,
                                            ThemeName::PersonalTastes};
  return names;
}

const Theme& standard_theme(ThemeName name) {
  static const Theme preference{ThemeName::PreferenceTargets,
                                {
                                    {"Subject", "Which subjects or motifs in a picture pull you in, and which push you away?"},
                                    {"Story", "Do you respond to pictures that suggest a narrative? What kind?"},
                                    {"Culture & History", "How do you feel about pictures with a cultural or historical backdrop?"},
                                    {"Art", "Which art forms, genres or media do you spend time with?"},
                                    {"Daily Moments", "Which everyday scenes strike you as pleasant or beautiful, and which as unpleasant?"},
                                },
                                15};
  static const Theme reactions{ThemeName::ImageEvokedReactions,
                               {
                                   {"Emotional Reaction", "What sort of picture stirs strong feelings in you?"},
                                   {"Physical Reaction", "Has a picture ever given you a bodily response, like chills?"},
                                   {"Creativity", "What makes a picture feel new or original to you?"},
                               },
                               10};
  static const Theme tastes{ThemeName::PersonalTastes,
                            {
                                {"Likes", "Outside of pictures, what things or experiences attract you?"},
                                {"Dislikes", "Outside of pictures, what do you tend to avoid?"},
                            },
                            10};
  switch (name) {
    case ThemeName::PreferenceTargets: return preference;
    case ThemeName::ImageEvokedReactions: return reactions;
    case ThemeName::PersonalTastes: return tastes;
  }
  throw std::logic_error("unhandled theme");
}

}  // namespace preflab::interview
