#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vagent/emotion.hpp"

namespace vagent {

enum class Speaker { User, Agent };

std::string_view to_string(Speaker speaker);

// One utterance in a conversation. Use the factories: agent turns always carry
// an emotion, user turns never do.
struct Turn {
  Speaker speaker = Speaker::User;
  std::string text;
  std::optional<Emotion> emotion;
  std::int64_t started_at_ms = 0;  // session-relative
  bool moderation_flagged = false;

  static Turn user(std::string text, std::int64_t started_at_ms, bool flagged = false);
  static Turn agent(std::string text, Emotion emotion, std::int64_t started_at_ms);

  bool operator==(const Turn&) const = default;
};

// Ordered, half-duplex conversation history. Immutable from the outside;
// append_turn produces a new value.
class Transcript {
 public:
  Transcript() = default;
  explicit Transcript(std::string session_id) : session_id_(std::move(session_id)) {}

  const std::string& session_id() const noexcept { return session_id_; }
  std::span<const Turn> turns() const noexcept { return turns_; }
  std::size_t size() const noexcept { return turns_.size(); }
  bool empty() const noexcept { return turns_.empty(); }
  std::size_t user_turn_count() const;

  bool operator==(const Transcript&) const = default;

 private:
  friend Transcript append_turn(Transcript transcript, Turn turn);
  std::string session_id_;
  std::vector<Turn> turns_;
};

// Throws Error(AlternationViolation) or Error(TimestampRegression).
Transcript append_turn(Transcript transcript, Turn turn);

enum class Role { User, Assistant };
std::string_view to_string(Role role);

struct LlmMessage {
  Role role;
  std::string content;
  bool operator==(const LlmMessage&) const = default;
};

// Lets mock providers tell dialogue calls from feedback calls. Real adapters
// forward it as metadata.
enum class RequestPurpose { Dialogue, Feedback };

struct LlmRequest {
  std::string system;
  std::vector<LlmMessage> messages;
  RequestPurpose purpose = RequestPurpose::Dialogue;
};

// Prior turns in order (agent turns re-tagged with their emotion header), then
// the new utterance. Throws Error(EmptyUtterance) for a blank utterance.
LlmRequest build_llm_request(std::string_view system_prompt, const Transcript& transcript,
                             std::string_view user_utterance);

struct AgentReply {
  Emotion emotion = Emotion::Neutral;
  std::string text;
  bool parse_fallback = false;
  bool operator==(const AgentReply&) const = default;
};

// Reply grammar: the first non-blank line may be "EMOTION: <label>"
// (case-insensitive); everything after it is the spoken text. A missing header
// or an unknown label falls back to Neutral with parse_fallback set. Throws
// Error(EmptyReplyText) when no text remains.
AgentReply parse_emotion_tagged_reply(std::string_view raw);

// "EMOTION: <label>\n<text>"
std::string format_emotion_tagged_reply(Emotion emotion, std::string_view text);

void to_json(nlohmann::json& j, const Transcript& transcript);

}  // namespace vagent
