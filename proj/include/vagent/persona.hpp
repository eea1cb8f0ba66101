#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vagent/error.hpp"

namespace vagent {

inline constexpr std::size_t kMaxTraitLength = 200;

// User-defined identity of a virtual agent. Persona files on disk are JSON
// documents with exactly these field names.
struct PersonaSpec {
  std::string agent_name;
  std::vector<std::string> personality_traits;
  std::string background;
  std::string premise;
  std::map<std::string, std::string> user_info;
  std::string language;
  std::string avatar_id;
  std::string voice_id;

  bool operator==(const PersonaSpec&) const = default;
};

struct GuardrailPolicy {
  std::vector<std::string> directives;
  int abuse_strike_limit = 3;
  double moderation_threshold = 0.5;

  // Built-in directive set, used when no guardrail file is configured.
  static GuardrailPolicy defaults();

  bool operator==(const GuardrailPolicy&) const = default;
};

// Throws Error(ConfigError) when directives are empty, the strike limit is
// below one, or the threshold lies outside [0,1].
void check_policy(const GuardrailPolicy& policy);

enum class PersonaIssueKind { EmptyField, TraitTooLong, UnsupportedLanguage };

struct PersonaIssue {
  PersonaIssueKind kind;
  std::string field;      // EmptyField
  std::size_t index = 0;  // TraitTooLong
  std::string tag;        // UnsupportedLanguage

  std::string describe() const;
  bool operator==(const PersonaIssue&) const = default;
};

class PersonaError : public Error {
 public:
  explicit PersonaError(std::vector<PersonaIssue> issues);
  const std::vector<PersonaIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<PersonaIssue> issues_;
};

// A PersonaSpec that has passed validation. Only validate_persona can make one,
// so anything taking a ValidatedPersona cannot receive an unchecked spec.
class ValidatedPersona {
 public:
  const PersonaSpec& spec() const noexcept { return spec_; }

 private:
  explicit ValidatedPersona(PersonaSpec spec) : spec_(std::move(spec)) {}
  friend ValidatedPersona validate_persona(PersonaSpec spec,
                                           std::span<const std::string> supported_languages);
  PersonaSpec spec_;
};

// Every violated invariant, in field order. Empty means valid.
std::vector<PersonaIssue> check_persona(const PersonaSpec& spec,
                                        std::span<const std::string> supported_languages);

// Throws PersonaError carrying all issues.
ValidatedPersona validate_persona(PersonaSpec spec,
                                  std::span<const std::string> supported_languages);

// RFC 5646 langtag syntax (grandfathered tags are not accepted).
bool is_well_formed_language_tag(std::string_view tag);

// Placeholder thirteen-language list; deployments override it in config.
std::vector<std::string> default_supported_languages();

// Deterministic system prompt. Sections, in order: identity, scenario, user
// information, guardrails, emotion instruction, language.
std::string assemble_system_prompt(const ValidatedPersona& persona, const GuardrailPolicy& policy,
                                   std::string_view goal);

// "Neutral, Happy, Sad, Angry, Surprised, Afraid, and Disgusted"
std::string emotion_list_phrase();

void to_json(nlohmann::json& j, const PersonaSpec& spec);
void from_json(const nlohmann::json& j, PersonaSpec& spec);
void to_json(nlohmann::json& j, const GuardrailPolicy& policy);
void from_json(const nlohmann::json& j, GuardrailPolicy& policy);

}  // namespace vagent
