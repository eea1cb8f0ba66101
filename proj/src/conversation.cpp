#include "vagent/conversation.hpp"

#include <fstream>

#include "text_util.hpp"
#include "vagent/dialogue.hpp"
#include "vagent/feedback.hpp"

namespace vagent {

namespace {

class InFlightGuard {
 public:
  explicit InFlightGuard(std::atomic<bool>& flag) : flag_(flag) {
    bool expected = false;
    if (!flag_.compare_exchange_strong(expected, true)) {
      throw Error(ErrorCode::TurnInFlight, "a turn is already in flight for this session");
    }
  }
  ~InFlightGuard() { flag_.store(false); }
  InFlightGuard(const InFlightGuard&) = delete;
  InFlightGuard& operator=(const InFlightGuard&) = delete;

 private:
  std::atomic<bool>& flag_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t turn) {
  return seed ^ (turn * 0x9E3779B97F4A7C15ULL);
}

}  // namespace

Conversation::Conversation(std::shared_ptr<const Engine> engine, Session session, std::uint64_t seed)
    : engine_(std::move(engine)), session_(std::move(session)), seed_(seed) {}

msg::SessionReady Conversation::start() {
  session_.activate();
  const auto& clips = *engine_->services.clips;
  return msg::SessionReady{session_.id(), clips.channels(), clips.fps()};
}

TurnOutcome Conversation::run_turn(const UtteranceInput& input, const MessageSink& emit) {
  InFlightGuard guard(in_flight_);
  if (!session_.running()) {
    throw Error(ErrorCode::InvalidTransition, "session " + session_.id() + " is not running");
  }
  const Services& services = engine_->services;
  const std::string& language = session_.persona().spec().language;
  const std::int64_t user_at = session_.elapsed_ms();

  auto abort_with = [&](const Error& e) {
    emit(to_message(e));
    return TurnOutcome::Aborted;
  };

  std::string utterance;
  if (const auto* text = std::get_if<std::string>(&input)) {
    utterance = *text;
  } else {
    try {
      utterance = transcribe(services.stt, std::get<AudioUtterance>(input), language,
                             services.budgets.stt);
    } catch (const Error& e) {
      return abort_with(e);
    }
  }
  utterance = std::string(text::trim(utterance));
  if (utterance.empty()) return abort_with(Error(ErrorCode::EmptyUtterance, "nothing was said"));
  emit(msg::UserTranscript{utterance});

  bool flagged = false;
  try {
    flagged = moderate(services.moderation, utterance, services.budgets.moderation) >=
              session_.policy().moderation_threshold;
  } catch (const Error& e) {
    return abort_with(e);
  }
  if (session_.record_moderation_result(flagged) == ModerationOutcome::CloseDue) {
    session_.append(Turn::user(utterance, user_at, true));
    close(CloseReason::AbuseLimit, emit);
    return TurnOutcome::SessionClosed;
  }

  AgentReply reply;
  try {
    LlmRequest request = build_llm_request(session_.system_prompt(), session_.transcript(), utterance);
    reply = parse_emotion_tagged_reply(complete(services.llm, std::move(request), services.budgets.llm));
  } catch (const Error& e) {
    return abort_with(e);
  }

  Synthesis synthesis;
  AnimationTrack track;
  try {
    const auto& spec = session_.persona().spec();
    auto pending = synthesize_async(services.tts,
                                    SynthesisRequest{reply.text, reply.emotion, spec.voice_id, language},
                                    services.budgets.tts);
    const BlendshapeClip& clip =
        select_clip(*services.clips, reply.emotion, mix_seed(seed_, session_.transcript().size()));
    synthesis = pending.get();
    track = build_animation_track(clip, synthesis.duration_ms);
  } catch (const Error& e) {
    return abort_with(e);
  }

  const std::int64_t agent_at = session_.elapsed_ms();
  emit(msg::AgentReplyStart{reply.emotion, synthesis.duration_ms});
  stream_reply(synthesis, track, emit);
  emit(msg::AgentReplyEnd{});

  session_.append(Turn::user(std::move(utterance), user_at, flagged));
  session_.append(Turn::agent(std::move(reply.text), reply.emotion, agent_at));
  return TurnOutcome::Completed;
}

// Interleaves audio and animation chunks by start time; audio first on ties.
void Conversation::stream_reply(const Synthesis& synthesis, const AnimationTrack& track,
                                const MessageSink& emit) {
  const std::uint64_t fps = static_cast<std::uint64_t>(track.fps);
  std::size_t audio_i = 0;
  std::uint64_t audio_samples_before = 0;
  std::size_t frame_i = 0;

  while (audio_i < synthesis.chunks.size() || frame_i < track.frames.size()) {
    bool audio_next = audio_i < synthesis.chunks.size();
    if (audio_next && frame_i < track.frames.size()) {
      // samples/rate <= frame/fps, compared without division.
      audio_next = audio_samples_before * fps <= static_cast<std::uint64_t>(frame_i) * kTtsSampleRate;
    }
    if (audio_next) {
      const AudioChunk& chunk = synthesis.chunks[audio_i++];
      audio_samples_before += chunk.samples.size();
      emit(msg::AgentAudioChunk{chunk});
    } else {
      const std::size_t end = std::min(track.frames.size(), frame_i + msg::kMaxAnimationFramesPerMessage);
      msg::AgentAnimationChunk chunk;
      chunk.first_frame_index = frame_i;
      chunk.frames.assign(track.frames.begin() + static_cast<std::ptrdiff_t>(frame_i),
                          track.frames.begin() + static_cast<std::ptrdiff_t>(end));
      frame_i = end;
      emit(std::move(chunk));
    }
  }
}

void Conversation::tick(const MessageSink& emit) {
  for (TimerEvent event : session_.tick()) {
    if (event == TimerEvent::WarningDue) {
      const auto remaining = session_.timing().close_after.count() - session_.elapsed_ms();
      emit(msg::TimeWarning{std::max<std::int64_t>(0, remaining)});
    } else {
      close(CloseReason::TimeLimit, emit);
    }
  }
}

bool Conversation::close(CloseReason reason, const MessageSink& emit) {
  if (!session_.running()) return false;
  session_.close(reason);
  export_transcript();
  if (engine_->on_session_closed) engine_->on_session_closed(session_.id(), reason);
  emit(msg::SessionClosed{reason});
  return true;
}

void Conversation::request_feedback(const MessageSink& emit) {
  if (session_.phase() != SessionPhase::Closed) {
    emit(to_message(Error(ErrorCode::ProtocolViolation, "feedback is available after the call ends")));
    return;
  }
  if (session_.transcript_discarded()) {
    emit(to_message(Error(ErrorCode::ProtocolViolation,
                          "feedback was already delivered and the transcript discarded")));
    return;
  }
  const std::string goal = text::trim(session_.goal()).empty() ? engine_->default_feedback_goal
                                                               : session_.goal();
  try {
    auto report = generate_feedback(engine_->services.llm, session_.transcript(), goal,
                                    engine_->services.budgets.llm);
    emit(msg::FeedbackReport{std::move(report)});
    session_.discard_transcript();
  } catch (const Error& e) {
    emit(to_message(e));
  }
}

void Conversation::export_transcript() const {
  if (!engine_->export_dir) return;
  std::error_code ec;
  std::filesystem::create_directories(*engine_->export_dir, ec);
  std::ofstream out(*engine_->export_dir / (session_.id() + ".json"));
  nlohmann::json j = session_.transcript();
  j["close_reason"] = to_string(*session_.close_reason());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

ConnectionHandler::ConnectionHandler(std::shared_ptr<const Engine> engine,
                                     std::shared_ptr<const Clock> clock, std::string session_id,
                                     std::uint64_t seed, MessageSink sink)
    : engine_(std::move(engine)),
      clock_(std::move(clock)),
      session_id_(std::move(session_id)),
      seed_(seed),
      sink_(std::move(sink)) {}

void ConnectionHandler::error(ErrorCode code, const std::string& message) {
  sink_(to_message(Error(code, message)));
}

void ConnectionHandler::handle(const ClientMessage& message) {
  if (const auto* hello = std::get_if<msg::Hello>(&message)) {
    on_hello(*hello);
    return;
  }
  if (!conversation_) {
    error(ErrorCode::ProtocolViolation, "the first message must be hello");
    return;
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, msg::UtteranceText>) {
          run_turn(m.text);
        } else if constexpr (std::is_same_v<T, msg::UtteranceAudioChunk>) {
          if (require_running()) pending_audio_.push_back(m.chunk);
        } else if constexpr (std::is_same_v<T, msg::UtteranceEnd>) {
          AudioUtterance utterance{std::move(pending_audio_), m.sidecar_text};
          pending_audio_.clear();
          run_turn(std::move(utterance));
        } else if constexpr (std::is_same_v<T, msg::EndCall>) {
          if (!conversation_->close(CloseReason::UserEnded, sink_)) {
            error(ErrorCode::AlreadyClosed, "the call has already ended");
          }
        } else if constexpr (std::is_same_v<T, msg::RequestFeedback>) {
          conversation_->request_feedback(sink_);
        }
      },
      message);
}

void ConnectionHandler::on_hello(const msg::Hello& hello) {
  if (conversation_) {
    error(ErrorCode::ProtocolViolation, "hello may only be sent once per connection");
    return;
  }
  PersonaSpec spec;
  if (hello.persona) {
    spec = *hello.persona;
  } else if (hello.persona_id) {
    auto it = engine_->personas.find(*hello.persona_id);
    if (it == engine_->personas.end()) {
      error(ErrorCode::InvalidPersona, "unknown persona_id \"" + *hello.persona_id + "\"");
      return;
    }
    spec = it->second;
  } else {
    error(ErrorCode::InvalidPersona, "hello needs a persona or a persona_id");
    return;
  }

  try {
    ValidatedPersona persona = validate_persona(std::move(spec), engine_->supported_languages);
    Session session = create_session(session_id_, std::move(persona), engine_->policy, hello.goal,
                                     clock_, engine_->timing);
    conversation_ = std::make_unique<Conversation>(engine_, std::move(session), seed_);
    sink_(conversation_->start());
  } catch (const Error& e) {
    conversation_.reset();
    sink_(to_message(e));
  }
}

bool ConnectionHandler::require_running() {
  if (conversation_->session().running()) return true;
  error(ErrorCode::ProtocolViolation, "the call has ended");
  return false;
}

void ConnectionHandler::run_turn(const UtteranceInput& input) {
  if (!require_running()) return;
  try {
    conversation_->run_turn(input, sink_);
  } catch (const Error& e) {
    sink_(to_message(e));
  }
}

void ConnectionHandler::tick() {
  if (conversation_) conversation_->tick(sink_);
}

void ConnectionHandler::transport_lost() {
  if (!conversation_) return;
  conversation_->close(CloseReason::TransportLost, [](ServerMessage) {});
  conversation_.reset();
  pending_audio_.clear();
}

void ConnectionHandler::shutdown() {
  if (conversation_) conversation_->close(CloseReason::ServerShutdown, sink_);
}

}  // namespace vagent
