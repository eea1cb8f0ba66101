#include "vagent/error.hpp"

namespace vagent {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidPersona: return "InvalidPersona";
    case ErrorCode::EmptyUtterance: return "EmptyUtterance";
    case ErrorCode::EmptyReplyText: return "EmptyReplyText";
    case ErrorCode::AlternationViolation: return "AlternationViolation";
    case ErrorCode::TimestampRegression: return "TimestampRegression";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::AlreadyClosed: return "AlreadyClosed";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::ProviderTimeout: return "ProviderTimeout";
    case ErrorCode::StreamCorrupt: return "StreamCorrupt";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingEmotion: return "MissingEmotion";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorCode::EmptyTranscript: return "EmptyTranscript";
    case ErrorCode::UnparseableFeedback: return "UnparseableFeedback";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::TurnInFlight: return "TurnInFlight";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::BindError: return "BindError";
    case ErrorCode::ScriptParseError: return "ScriptParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace vagent
