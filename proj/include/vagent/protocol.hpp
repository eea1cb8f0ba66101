#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vagent/error.hpp"
#include "vagent/expression.hpp"
#include "vagent/feedback.hpp"
#include "vagent/persona.hpp"
#include "vagent/providers.hpp"
#include "vagent/session.hpp"

// Browser <-> server protocol. Control messages are UTF-8 JSON text frames with
// a "type" discriminator. Audio travels in binary frames:
//
//   byte 0      type tag (0x01 user audio @16 kHz, 0x02 agent audio @24 kHz)
//   bytes 1-4   seq, unsigned 32-bit big-endian
//   byte 5      final flag (0 or 1)
//   bytes 6..   PCM16 samples, little-endian
namespace vagent::msg {

inline constexpr std::uint8_t kUserAudioTag = 0x01;
inline constexpr std::uint8_t kAgentAudioTag = 0x02;
inline constexpr std::size_t kAudioHeaderSize = 6;
inline constexpr std::size_t kMaxAnimationFramesPerMessage = 30;

// Client -> server.
struct Hello {
  std::optional<PersonaSpec> persona;
  std::optional<std::string> persona_id;
  std::string goal;
  bool operator==(const Hello&) const = default;
};
struct UtteranceText {
  std::string text;
  bool operator==(const UtteranceText&) const = default;
};
struct UtteranceAudioChunk {
  AudioChunk chunk;
  bool operator==(const UtteranceAudioChunk&) const = default;
};
struct UtteranceEnd {
  std::optional<std::string> sidecar_text;
  bool operator==(const UtteranceEnd&) const = default;
};
struct EndCall {
  bool operator==(const EndCall&) const = default;
};
struct RequestFeedback {
  bool operator==(const RequestFeedback&) const = default;
};

// Server -> client.
struct SessionReady {
  std::string session_id;
  std::vector<std::string> channels;
  int fps = 30;
  bool operator==(const SessionReady&) const = default;
};
struct UserTranscript {
  std::string text;
  bool operator==(const UserTranscript&) const = default;
};
struct AgentReplyStart {
  Emotion emotion = Emotion::Neutral;
  std::int64_t duration_ms = 0;
  bool operator==(const AgentReplyStart&) const = default;
};
struct AgentAudioChunk {
  AudioChunk chunk;
  bool operator==(const AgentAudioChunk&) const = default;
};
struct AgentAnimationChunk {
  std::uint64_t first_frame_index = 0;
  std::vector<BlendshapeFrame> frames;
  bool operator==(const AgentAnimationChunk&) const = default;
};
struct AgentReplyEnd {
  bool operator==(const AgentReplyEnd&) const = default;
};
struct TimeWarning {
  std::int64_t remaining_ms = 0;
  bool operator==(const TimeWarning&) const = default;
};
struct SessionClosed {
  CloseReason reason = CloseReason::UserEnded;
  bool operator==(const SessionClosed&) const = default;
};
struct FeedbackReport {
  vagent::FeedbackReport report;
  bool operator==(const FeedbackReport&) const = default;
};
struct Error {
  std::string code;
  std::string message;
  bool operator==(const Error&) const = default;
};

}  // namespace vagent::msg

namespace vagent {

using ClientMessage = std::variant<msg::Hello, msg::UtteranceText, msg::UtteranceAudioChunk,
                                   msg::UtteranceEnd, msg::EndCall, msg::RequestFeedback>;

using ServerMessage =
    std::variant<msg::SessionReady, msg::UserTranscript, msg::AgentReplyStart, msg::AgentAudioChunk,
                 msg::AgentAnimationChunk, msg::AgentReplyEnd, msg::TimeWarning, msg::SessionClosed,
                 msg::FeedbackReport, msg::Error>;

struct WireFrame {
  enum class Kind { Text, Binary };
  Kind kind = Kind::Text;
  std::string payload;
  bool operator==(const WireFrame&) const = default;
};

class DecodeError : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& reason);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Throws Error(InvalidArgument) for messages that cannot be represented, such
// as audio at the wrong sample rate.
WireFrame encode_message(const ClientMessage& message);
WireFrame encode_message(const ServerMessage& message);

// Throw DecodeError(offset, reason).
ClientMessage decode_client_message(const WireFrame& frame);
ServerMessage decode_server_message(const WireFrame& frame);

// The "type" discriminator of a message, e.g. "agent_reply_start".
std::string_view message_type(const ClientMessage& message);
std::string_view message_type(const ServerMessage& message);

msg::Error to_message(const Error& error);

}  // namespace vagent
