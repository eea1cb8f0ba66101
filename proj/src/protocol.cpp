#include "vagent/protocol.hpp"

#include <nlohmann/json.hpp>

namespace vagent {

using nlohmann::json;

DecodeError::DecodeError(std::size_t offset, const std::string& reason)
    : Error(ErrorCode::DecodeError, "decode error at byte " + std::to_string(offset) + ": " + reason),
      offset_(offset) {}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

// ---- binary audio frames ----

std::string encode_audio(std::uint8_t tag, const AudioChunk& chunk, std::uint32_t expected_rate) {
  if (chunk.sample_rate != expected_rate) {
    throw Error(ErrorCode::InvalidArgument, "audio chunk at " + std::to_string(chunk.sample_rate) +
                                                " Hz cannot use frame tag " + std::to_string(tag));
  }
  std::string out;
  out.reserve(msg::kAudioHeaderSize + chunk.samples.size() * 2);
  out.push_back(static_cast<char>(tag));
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((chunk.seq >> shift) & 0xFF));
  }
  out.push_back(static_cast<char>(chunk.final ? 1 : 0));
  for (std::int16_t s : chunk.samples) {
    const auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<char>(u & 0xFF));
    out.push_back(static_cast<char>(u >> 8));
  }
  return out;
}

AudioChunk decode_audio(const std::string& bytes, std::uint32_t sample_rate) {
  if (bytes.size() < msg::kAudioHeaderSize) {
    throw DecodeError(bytes.size(), "truncated audio frame header");
  }
  auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(bytes[i]); };
  AudioChunk chunk;
  chunk.sample_rate = sample_rate;
  chunk.seq = (std::uint32_t{byte(1)} << 24) | (std::uint32_t{byte(2)} << 16) |
              (std::uint32_t{byte(3)} << 8) | std::uint32_t{byte(4)};
  if (byte(5) > 1) throw DecodeError(5, "final flag must be 0 or 1");
  chunk.final = byte(5) == 1;
  const std::size_t payload = bytes.size() - msg::kAudioHeaderSize;
  if (payload % 2 != 0) throw DecodeError(bytes.size() - 1, "odd number of PCM16 bytes");
  chunk.samples.resize(payload / 2);
  for (std::size_t i = 0; i < chunk.samples.size(); ++i) {
    const std::size_t at = msg::kAudioHeaderSize + 2 * i;
    chunk.samples[i] =
        static_cast<std::int16_t>(static_cast<std::uint16_t>(byte(at) | (byte(at + 1) << 8)));
  }
  return chunk;
}

// ---- JSON helpers ----

WireFrame text_frame(const json& j) {
  return WireFrame{WireFrame::Kind::Text, j.dump()};
}

json parse_text(const WireFrame& frame) {
  try {
    json j = json::parse(frame.payload);
    if (!j.is_object()) throw DecodeError(0, "control message must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw DecodeError(e.byte == 0 ? 0 : e.byte - 1, "malformed JSON");
  }
}

template <class T>
T get(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw DecodeError(0, std::string("missing field \"") + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DecodeError(0, std::string("field \"") + key + "\" has the wrong type");
  }
}

json frames_to_json(const std::vector<BlendshapeFrame>& frames) {
  json arr = json::array();
  for (const auto& f : frames) arr.push_back(f.weights);
  return arr;
}

std::vector<BlendshapeFrame> frames_from_json(const json& j) {
  auto raw = get<std::vector<std::vector<double>>>(j, "frames");
  std::vector<BlendshapeFrame> frames;
  frames.reserve(raw.size());
  for (auto& w : raw) frames.push_back(BlendshapeFrame{std::move(w)});
  return frames;
}

}  // namespace

std::string_view message_type(const ClientMessage& message) {
  return std::visit(Overloaded{
                        [](const msg::Hello&) { return "hello"; },
                        [](const msg::UtteranceText&) { return "utterance_text"; },
                        [](const msg::UtteranceAudioChunk&) { return "utterance_audio_chunk"; },
                        [](const msg::UtteranceEnd&) { return "utterance_end"; },
                        [](const msg::EndCall&) { return "end_call"; },
                        [](const msg::RequestFeedback&) { return "request_feedback"; },
                    },
                    message);
}

std::string_view message_type(const ServerMessage& message) {
  return std::visit(Overloaded{
                        [](const msg::SessionReady&) { return "session_ready"; },
                        [](const msg::UserTranscript&) { return "user_transcript"; },
                        [](const msg::AgentReplyStart&) { return "agent_reply_start"; },
                        [](const msg::AgentAudioChunk&) { return "agent_audio_chunk"; },
                        [](const msg::AgentAnimationChunk&) { return "agent_animation_chunk"; },
                        [](const msg::AgentReplyEnd&) { return "agent_reply_end"; },
                        [](const msg::TimeWarning&) { return "time_warning"; },
                        [](const msg::SessionClosed&) { return "session_closed"; },
                        [](const msg::FeedbackReport&) { return "feedback_report"; },
                        [](const msg::Error&) { return "error"; },
                    },
                    message);
}

WireFrame encode_message(const ClientMessage& message) {
  const std::string type(message_type(message));
  return std::visit(
      Overloaded{
          [&](const msg::Hello& m) {
            json j{{"type", type}, {"goal", m.goal}};
            if (m.persona) j["persona"] = *m.persona;
            if (m.persona_id) j["persona_id"] = *m.persona_id;
            return text_frame(j);
          },
          [&](const msg::UtteranceText& m) { return text_frame({{"type", type}, {"text", m.text}}); },
          [&](const msg::UtteranceAudioChunk& m) {
            return WireFrame{WireFrame::Kind::Binary,
                             encode_audio(msg::kUserAudioTag, m.chunk, kSttSampleRate)};
          },
          [&](const msg::UtteranceEnd& m) {
            json j{{"type", type}};
            if (m.sidecar_text) j["sidecar_text"] = *m.sidecar_text;
            return text_frame(j);
          },
          [&](const msg::EndCall&) { return text_frame({{"type", type}}); },
          [&](const msg::RequestFeedback&) { return text_frame({{"type", type}}); },
      },
      message);
}

WireFrame encode_message(const ServerMessage& message) {
  const std::string type(message_type(message));
  return std::visit(
      Overloaded{
          [&](const msg::SessionReady& m) {
            return text_frame({{"type", type},
                               {"session_id", m.session_id},
                               {"channels", m.channels},
                               {"fps", m.fps}});
          },
          [&](const msg::UserTranscript& m) { return text_frame({{"type", type}, {"text", m.text}}); },
          [&](const msg::AgentReplyStart& m) {
            return text_frame(
                {{"type", type}, {"emotion", to_string(m.emotion)}, {"duration_ms", m.duration_ms}});
          },
          [&](const msg::AgentAudioChunk& m) {
            return WireFrame{WireFrame::Kind::Binary,
                             encode_audio(msg::kAgentAudioTag, m.chunk, kTtsSampleRate)};
          },
          [&](const msg::AgentAnimationChunk& m) {
            return text_frame({{"type", type},
                               {"first_frame_index", m.first_frame_index},
                               {"frames", frames_to_json(m.frames)}});
          },
          [&](const msg::AgentReplyEnd&) { return text_frame({{"type", type}}); },
          [&](const msg::TimeWarning& m) {
            return text_frame({{"type", type}, {"remaining_ms", m.remaining_ms}});
          },
          [&](const msg::SessionClosed& m) {
            return text_frame({{"type", type}, {"reason", to_string(m.reason)}});
          },
          [&](const msg::FeedbackReport& m) {
            return text_frame({{"type", type}, {"report", m.report}});
          },
          [&](const msg::Error& m) {
            return text_frame({{"type", type}, {"code", m.code}, {"message", m.message}});
          },
      },
      message);
}

ClientMessage decode_client_message(const WireFrame& frame) {
  if (frame.kind == WireFrame::Kind::Binary) {
    if (frame.payload.empty()) throw DecodeError(0, "empty binary frame");
    if (static_cast<std::uint8_t>(frame.payload[0]) != msg::kUserAudioTag) {
      throw DecodeError(0, "unknown binary frame tag");
    }
    return msg::UtteranceAudioChunk{decode_audio(frame.payload, kSttSampleRate)};
  }

  const json j = parse_text(frame);
  const auto type = get<std::string>(j, "type");
  if (type == "hello") {
    msg::Hello m;
    m.goal = j.value("goal", std::string{});
    try {
      if (auto it = j.find("persona"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw DecodeError(0, "persona must be an object");
        m.persona = it->get<PersonaSpec>();
      }
      if (auto it = j.find("persona_id"); it != j.end() && !it->is_null()) {
        m.persona_id = it->get<std::string>();
      }
    } catch (const json::exception&) {
      throw DecodeError(0, "malformed persona in hello");
    }
    return m;
  }
  if (type == "utterance_text") return msg::UtteranceText{get<std::string>(j, "text")};
  if (type == "utterance_end") {
    msg::UtteranceEnd m;
    if (auto it = j.find("sidecar_text"); it != j.end() && !it->is_null()) {
      m.sidecar_text = get<std::string>(j, "sidecar_text");
    }
    return m;
  }
  if (type == "end_call") return msg::EndCall{};
  if (type == "request_feedback") return msg::RequestFeedback{};
  throw DecodeError(0, "unknown client message type \"" + type + "\"");
}

ServerMessage decode_server_message(const WireFrame& frame) {
  if (frame.kind == WireFrame::Kind::Binary) {
    if (frame.payload.empty()) throw DecodeError(0, "empty binary frame");
    if (static_cast<std::uint8_t>(frame.payload[0]) != msg::kAgentAudioTag) {
      throw DecodeError(0, "unknown binary frame tag");
    }
    return msg::AgentAudioChunk{decode_audio(frame.payload, kTtsSampleRate)};
  }

  const json j = parse_text(frame);
  const auto type = get<std::string>(j, "type");
  if (type == "session_ready") {
    return msg::SessionReady{get<std::string>(j, "session_id"),
                             get<std::vector<std::string>>(j, "channels"), get<int>(j, "fps")};
  }
  if (type == "user_transcript") return msg::UserTranscript{get<std::string>(j, "text")};
  if (type == "agent_reply_start") {
    auto emotion = parse_emotion(get<std::string>(j, "emotion"));
    if (!emotion) throw DecodeError(0, "unknown emotion label");
    return msg::AgentReplyStart{*emotion, get<std::int64_t>(j, "duration_ms")};
  }
  if (type == "agent_animation_chunk") {
    return msg::AgentAnimationChunk{get<std::uint64_t>(j, "first_frame_index"), frames_from_json(j)};
  }
  if (type == "agent_reply_end") return msg::AgentReplyEnd{};
  if (type == "time_warning") return msg::TimeWarning{get<std::int64_t>(j, "remaining_ms")};
  if (type == "session_closed") {
    auto reason = parse_close_reason(get<std::string>(j, "reason"));
    if (!reason) throw DecodeError(0, "unknown close reason");
    return msg::SessionClosed{*reason};
  }
  if (type == "feedback_report") {
    try {
      return msg::FeedbackReport{j.at("report").get<vagent::FeedbackReport>()};
    } catch (const json::exception&) {
      throw DecodeError(0, "malformed feedback report");
    }
  }
  if (type == "error") return msg::Error{get<std::string>(j, "code"), get<std::string>(j, "message")};
  throw DecodeError(0, "unknown server message type \"" + type + "\"");
}

msg::Error to_message(const Error& error) {
  return msg::Error{std::string(to_string(error.code())), error.what()};
}

}  // namespace vagent
