#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vagent {

// One code per failure the core can report. The string form of a code is what
// travels in the wire protocol's Error message, so renaming one is a protocol
// change.
enum class ErrorCode {
  InvalidArgument,
  InvalidPersona,
  EmptyUtterance,
  EmptyReplyText,
  AlternationViolation,
  TimestampRegression,
  InvalidTransition,
  AlreadyClosed,
  ProviderUnavailable,
  ProviderTimeout,
  StreamCorrupt,
  ParseError,
  MissingEmotion,
  ChannelMismatch,
  WeightOutOfRange,
  EmptyTranscript,
  UnparseableFeedback,
  DecodeError,
  TurnInFlight,
  ProtocolViolation,
  ConfigError,
  BindError,
  ScriptParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vagent
