#include "vagent/dialogue.hpp"

#include <algorithm>

#include "text_util.hpp"
#include "vagent/error.hpp"

namespace vagent {

std::string_view to_string(Speaker speaker) {
  return speaker == Speaker::User ? "User" : "Agent";
}

std::string_view to_string(Role role) {
  return role == Role::User ? "user" : "assistant";
}

Turn Turn::user(std::string text, std::int64_t started_at_ms, bool flagged) {
  return Turn{Speaker::User, std::move(text), std::nullopt, started_at_ms, flagged};
}

Turn Turn::agent(std::string text, Emotion emotion, std::int64_t started_at_ms) {
  return Turn{Speaker::Agent, std::move(text), emotion, started_at_ms, false};
}

std::size_t Transcript::user_turn_count() const {
  return static_cast<std::size_t>(std::count_if(
      turns_.begin(), turns_.end(), [](const Turn& t) { return t.speaker == Speaker::User; }));
}

Transcript append_turn(Transcript transcript, Turn turn) {
  if (turn.speaker == Speaker::Agent && !turn.emotion) {
    throw Error(ErrorCode::InvalidArgument, "agent turn without emotion");
  }
  if (turn.speaker == Speaker::User && turn.emotion) {
    throw Error(ErrorCode::InvalidArgument, "user turn with emotion");
  }
  if (!transcript.turns_.empty()) {
    const Turn& last = transcript.turns_.back();
    if (last.speaker == turn.speaker) {
      throw Error(ErrorCode::AlternationViolation,
                  "two consecutive " + std::string(to_string(turn.speaker)) + " turns");
    }
    if (turn.started_at_ms < last.started_at_ms) {
      throw Error(ErrorCode::TimestampRegression,
                  "turn at " + std::to_string(turn.started_at_ms) + " ms precedes previous turn at " +
                      std::to_string(last.started_at_ms) + " ms");
    }
  }
  transcript.turns_.push_back(std::move(turn));
  return transcript;
}

std::string format_emotion_tagged_reply(Emotion emotion, std::string_view text) {
  std::string out = "EMOTION: ";
  out += to_string(emotion);
  out += '\n';
  out += text;
  return out;
}

LlmRequest build_llm_request(std::string_view system_prompt, const Transcript& transcript,
                             std::string_view user_utterance) {
  auto utterance = text::trim(user_utterance);
  if (utterance.empty()) throw Error(ErrorCode::EmptyUtterance, "utterance is empty");

  LlmRequest request;
  request.system = std::string(system_prompt);
  request.messages.reserve(transcript.size() + 1);
  for (const Turn& turn : transcript.turns()) {
    if (turn.speaker == Speaker::User) {
      request.messages.push_back({Role::User, turn.text});
    } else {
      request.messages.push_back(
          {Role::Assistant, format_emotion_tagged_reply(*turn.emotion, turn.text)});
    }
  }
  request.messages.push_back({Role::User, std::string(utterance)});
  return request;
}

namespace {

// Returns the label when `line` is an emotion header.
std::optional<std::string_view> header_label(std::string_view line) {
  line = text::trim(line);
  constexpr std::string_view kKey = "emotion";
  if (!text::istarts_with(line, kKey)) return std::nullopt;
  std::string_view rest = line.substr(kKey.size());
  while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
  if (rest.empty() || rest.front() != ':') return std::nullopt;
  rest = text::trim(rest.substr(1));
  while (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  return rest;
}

}  // namespace

AgentReply parse_emotion_tagged_reply(std::string_view raw) {
  // Locate the first non-blank line.
  std::size_t line_start = 0;
  std::size_t line_end = raw.size();
  while (line_start < raw.size()) {
    line_end = raw.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = raw.size();
    if (!text::trim(raw.substr(line_start, line_end - line_start)).empty()) break;
    line_start = line_end + 1;
  }

  AgentReply reply;
  std::string_view body = raw;
  std::optional<std::string_view> label;
  if (line_start < raw.size()) label = header_label(raw.substr(line_start, line_end - line_start));

  if (label) {
    body = line_end < raw.size() ? raw.substr(line_end + 1) : std::string_view{};
    if (auto emotion = parse_emotion(*label)) {
      reply.emotion = *emotion;
      reply.parse_fallback = false;
    } else {
      reply.emotion = Emotion::Neutral;
      reply.parse_fallback = true;
    }
  } else {
    reply.emotion = Emotion::Neutral;
    reply.parse_fallback = true;
  }

  reply.text = std::string(text::trim(body));
  if (reply.text.empty()) throw Error(ErrorCode::EmptyReplyText, "reply has no spoken text");
  return reply;
}

void to_json(nlohmann::json& j, const Transcript& transcript) {
  auto turns = nlohmann::json::array();
  for (const Turn& turn : transcript.turns()) {
    nlohmann::json t{{"speaker", to_string(turn.speaker)},
                     {"text", turn.text},
                     {"started_at_ms", turn.started_at_ms}};
    if (turn.emotion) t["emotion"] = to_string(*turn.emotion);
    if (turn.speaker == Speaker::User) t["moderation_flagged"] = turn.moderation_flagged;
    turns.push_back(std::move(t));
  }
  j = nlohmann::json{{"session_id", transcript.session_id()}, {"turns", std::move(turns)}};
}

}  // namespace vagent
