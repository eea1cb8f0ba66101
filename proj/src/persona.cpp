#include "vagent/persona.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "text_util.hpp"
#include "vagent/emotion.hpp"

namespace vagent {

GuardrailPolicy GuardrailPolicy::defaults() {
  GuardrailPolicy policy;
  policy.directives = {
      "Do not harass, insult, threaten, or demean the user, and refuse requests to do so.",
      "Do not disclose that you are an AI or a language model unless the user asks directly.",
      "Stay in the persona and scenario described above for the whole conversation.",
  };
  return policy;
}

void check_policy(const GuardrailPolicy& policy) {
  if (policy.directives.empty()) {
    throw Error(ErrorCode::ConfigError, "guardrail policy has no directives");
  }
  if (policy.abuse_strike_limit < 1) {
    throw Error(ErrorCode::ConfigError, "abuse_strike_limit must be >= 1");
  }
  if (!(policy.moderation_threshold >= 0.0 && policy.moderation_threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "moderation_threshold must lie in [0,1]");
  }
}

std::string PersonaIssue::describe() const {
  switch (kind) {
    case PersonaIssueKind::EmptyField: return "EmptyField(" + field + ")";
    case PersonaIssueKind::TraitTooLong: return "TraitTooLong(" + std::to_string(index) + ")";
    case PersonaIssueKind::UnsupportedLanguage: return "UnsupportedLanguage(" + tag + ")";
  }
  return "Unknown";
}

namespace {

std::string join_issues(const std::vector<PersonaIssue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += ", ";
    out += issue.describe();
  }
  return out;
}

}  // namespace

PersonaError::PersonaError(std::vector<PersonaIssue> issues)
    : Error(ErrorCode::InvalidPersona, "invalid persona: " + join_issues(issues)),
      issues_(std::move(issues)) {}

bool is_well_formed_language_tag(std::string_view tag) {
  static const std::regex langtag(
      "[A-Za-z]{2,3}(-[A-Za-z]{3}){0,3}"         // language, extlang
      "(-[A-Za-z]{4})?"                          // script
      "(-([A-Za-z]{2}|[0-9]{3}))?"               // region
      "(-([A-Za-z0-9]{5,8}|[0-9][A-Za-z0-9]{3}))*"  // variants
      "(-[0-9A-WY-Za-wy-z](-[A-Za-z0-9]{2,8})+)*"    // extensions
      "(-[xX](-[A-Za-z0-9]{1,8})+)?"                 // private use
      "|[xX](-[A-Za-z0-9]{1,8})+");                  // private use only
  return std::regex_match(tag.begin(), tag.end(), langtag);
}

std::vector<std::string> default_supported_languages() {
  return {"en-US", "es-ES", "fr-FR", "de-DE", "it-IT", "pt-BR", "ja-JP",
          "ko-KR", "zh-CN", "hi-IN", "ar-SA", "ru-RU", "bn-BD"};
}

std::vector<PersonaIssue> check_persona(const PersonaSpec& spec,
                                        std::span<const std::string> supported_languages) {
  std::vector<PersonaIssue> issues;
  auto empty_field = [&](std::string name) {
    issues.push_back({PersonaIssueKind::EmptyField, std::move(name), 0, {}});
  };

  if (text::trim(spec.agent_name).empty()) empty_field("agent_name");
  if (spec.personality_traits.empty()) empty_field("personality_traits");
  for (std::size_t i = 0; i < spec.personality_traits.size(); ++i) {
    if (text::utf8_length(spec.personality_traits[i]) > kMaxTraitLength) {
      issues.push_back({PersonaIssueKind::TraitTooLong, {}, i, {}});
    }
  }
  if (text::trim(spec.premise).empty()) empty_field("premise");

  bool supported = is_well_formed_language_tag(spec.language) &&
                   std::any_of(supported_languages.begin(), supported_languages.end(),
                               [&](const std::string& s) { return text::iequals(s, spec.language); });
  if (!supported) {
    issues.push_back({PersonaIssueKind::UnsupportedLanguage, {}, 0, spec.language});
  }
  return issues;
}

ValidatedPersona validate_persona(PersonaSpec spec,
                                  std::span<const std::string> supported_languages) {
  auto issues = check_persona(spec, supported_languages);
  if (!issues.empty()) throw PersonaError(std::move(issues));
  return ValidatedPersona(std::move(spec));
}

std::string emotion_list_phrase() {
  std::string out;
  for (std::size_t i = 0; i < kAllEmotions.size(); ++i) {
    if (i > 0) out += ", ";
    if (i + 1 == kAllEmotions.size()) out += "and ";
    out += to_string(kAllEmotions[i]);
  }
  return out;
}

std::string assemble_system_prompt(const ValidatedPersona& persona, const GuardrailPolicy& policy,
                                   std::string_view goal) {
  const PersonaSpec& spec = persona.spec();
  std::ostringstream out;

  out << "# Identity\n";
  out << "You are " << text::trim(spec.agent_name) << ".\n";
  out << "Personality traits:\n";
  for (const auto& trait : spec.personality_traits) out << "- " << trait << '\n';
  auto background = text::trim(spec.background);
  out << "Background: " << (background.empty() ? std::string_view("NONE") : background) << "\n\n";

  out << "# Scenario\n";
  out << text::trim(spec.premise) << '\n';
  if (auto g = text::trim(goal); !g.empty()) {
    out << "The user's goal for this conversation: " << g << '\n';
  }
  out << '\n';

  out << "# User information\n";
  if (spec.user_info.empty()) {
    out << "NONE\n";
  } else {
    for (const auto& [key, value] : spec.user_info) out << "- " << key << ": " << value << '\n';
  }
  out << '\n';

  out << "# Guardrails\n";
  for (const auto& directive : policy.directives) out << "- " << directive << '\n';
  out << '\n';

  out << "# Emotion\n";
  out << "Start every reply with one line of the form \"EMOTION: <label>\", where <label> is "
         "your emotional state for that reply, chosen from the following list: "
      << emotion_list_phrase()
      << ". Put the words you speak aloud on the lines after it.\n\n";

  out << "# Language\n";
  out << "Speak only in the language identified by the BCP-47 tag " << spec.language << ".\n";
  return out.str();
}

void to_json(nlohmann::json& j, const PersonaSpec& spec) {
  j = nlohmann::json{{"agent_name", spec.agent_name},
                     {"personality_traits", spec.personality_traits},
                     {"background", spec.background},
                     {"premise", spec.premise},
                     {"user_info", spec.user_info},
                     {"language", spec.language},
                     {"avatar_id", spec.avatar_id},
                     {"voice_id", spec.voice_id}};
}

// Absent fields stay empty and are reported by validation, not here.
void from_json(const nlohmann::json& j, PersonaSpec& spec) {
  spec.agent_name = j.value("agent_name", std::string{});
  spec.personality_traits = j.value("personality_traits", std::vector<std::string>{});
  spec.background = j.value("background", std::string{});
  spec.premise = j.value("premise", std::string{});
  spec.user_info = j.value("user_info", std::map<std::string, std::string>{});
  spec.language = j.value("language", std::string{});
  spec.avatar_id = j.value("avatar_id", std::string{});
  spec.voice_id = j.value("voice_id", std::string{});
}

void to_json(nlohmann::json& j, const GuardrailPolicy& policy) {
  j = nlohmann::json{{"directives", policy.directives},
                     {"abuse_strike_limit", policy.abuse_strike_limit},
                     {"moderation_threshold", policy.moderation_threshold}};
}

void from_json(const nlohmann::json& j, GuardrailPolicy& policy) {
  GuardrailPolicy defaults = GuardrailPolicy::defaults();
  policy.directives = j.value("directives", defaults.directives);
  policy.abuse_strike_limit = j.value("abuse_strike_limit", defaults.abuse_strike_limit);
  policy.moderation_threshold = j.value("moderation_threshold", defaults.moderation_threshold);
}

}  // namespace vagent
