#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vagent/expression.hpp"
#include "vagent/persona.hpp"
#include "vagent/protocol.hpp"
#include "vagent/providers.hpp"
#include "vagent/session.hpp"

namespace vagent {

struct Services {
  std::shared_ptr<SttProvider> stt;
  std::shared_ptr<LlmProvider> llm;
  std::shared_ptr<TtsProvider> tts;
  std::shared_ptr<ModerationProvider> moderation;
  std::shared_ptr<const ClipLibrary> clips;
  ProviderBudgets budgets;
};

// Everything a session needs that is shared, read-only, across the server.
struct Engine {
  Services services;
  GuardrailPolicy policy = GuardrailPolicy::defaults();
  std::vector<std::string> supported_languages = default_supported_languages();
  std::map<std::string, PersonaSpec> personas;  // by persona_id
  SessionTiming timing;
  // Opt-in debugging aid: when set, closed transcripts are written here.
  std::optional<std::filesystem::path> export_dir;
  // Used for feedback when the session was opened without a goal.
  std::string default_feedback_goal = "Communicate clearly and build rapport.";
  // Observer called once per session when it closes, from the session's owner.
  std::function<void(const std::string& session_id, CloseReason reason)> on_session_closed;
};

using MessageSink = std::function<void(ServerMessage)>;
using UtteranceInput = std::variant<std::string, AudioUtterance>;

enum class TurnOutcome { Completed, Aborted, SessionClosed };

// The turn pipeline for one running session. One owner drives it; run_turn
// refuses to start while another turn is in flight.
class Conversation {
 public:
  Conversation(std::shared_ptr<const Engine> engine, Session session, std::uint64_t seed);

  // Activates the session.
  msg::SessionReady start();

  // transcribe (audio only) -> moderate -> LLM -> parse -> TTS in parallel
  // with clip selection -> stream the reply. Provider and content failures are
  // emitted as Error and abort the turn with the session still open. Throws
  // Error(TurnInFlight) on re-entry and Error(InvalidTransition) when the
  // session is not running.
  TurnOutcome run_turn(const UtteranceInput& input, const MessageSink& emit);

  // Applies timer events: TimeWarning once, then SessionClosed(TimeLimit).
  void tick(const MessageSink& emit);

  // Emits SessionClosed(reason). Returns false when already closed.
  bool close(CloseReason reason, const MessageSink& emit);

  // Requires a closed session. Emits FeedbackReport, after which the
  // transcript is discarded, or Error.
  void request_feedback(const MessageSink& emit);

  bool turn_in_flight() const noexcept { return in_flight_.load(); }
  const Session& session() const noexcept { return session_; }

 private:
  void stream_reply(const Synthesis& synthesis, const AnimationTrack& track, const MessageSink& emit);
  void export_transcript() const;

  std::shared_ptr<const Engine> engine_;
  Session session_;
  std::uint64_t seed_;
  std::atomic<bool> in_flight_{false};
};

// Protocol state for one client connection, independent of the transport.
// Enforces Hello-first, buffers audio chunks until UtteranceEnd, and routes
// the rest to the Conversation. Not thread-safe; the transport serializes.
class ConnectionHandler {
 public:
  ConnectionHandler(std::shared_ptr<const Engine> engine, std::shared_ptr<const Clock> clock,
                    std::string session_id, std::uint64_t seed, MessageSink sink);

  void handle(const ClientMessage& message);
  void tick();
  // Client went away: close with TransportLost and drop the transcript.
  void transport_lost();
  // Server stopping: close with ServerShutdown.
  void shutdown();

  const Conversation* conversation() const noexcept { return conversation_.get(); }

 private:
  void error(ErrorCode code, const std::string& message);
  void on_hello(const msg::Hello& hello);
  void run_turn(const UtteranceInput& input);
  bool require_running();

  std::shared_ptr<const Engine> engine_;
  std::shared_ptr<const Clock> clock_;
  std::string session_id_;
  std::uint64_t seed_;
  MessageSink sink_;
  std::unique_ptr<Conversation> conversation_;
  std::vector<AudioChunk> pending_audio_;
};

}  // namespace vagent
