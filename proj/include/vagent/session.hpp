#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vagent/dialogue.hpp"
#include "vagent/persona.hpp"

namespace vagent {

using Millis = std::chrono::milliseconds;

// Monotonic time source. Injected so timer behaviour is testable.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  Millis now() const override;
};

class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(Millis start = Millis{0}) : now_(start.count()) {}
  Millis now() const override { return Millis{now_.load()}; }
  void advance(Millis by) { now_ += by.count(); }
  void set(Millis at) { now_ = at.count(); }

 private:
  std::atomic<std::int64_t> now_;
};

enum class SessionPhase { Created, Active, Warned, Closed };
enum class CloseReason { UserEnded, TimeLimit, AbuseLimit, TransportLost, ServerShutdown };
enum class TimerEvent { WarningDue, CloseDue };
enum class ModerationOutcome { Continue, CloseDue };

std::string_view to_string(SessionPhase phase);
std::string_view to_string(CloseReason reason);
std::optional<CloseReason> parse_close_reason(std::string_view name);

struct SessionTiming {
  Millis warn_after{480'000};
  Millis close_after{600'000};
};

// Throws Error(ConfigError) unless 0 < warn_after < close_after.
void check_timing(const SessionTiming& timing);

class AbuseCounter {
 public:
  explicit AbuseCounter(int limit);

  // Returns true when this strike reached the limit.
  bool record(bool flagged);
  int strikes() const noexcept { return strikes_; }
  int limit() const noexcept { return limit_; }

 private:
  int strikes_ = 0;
  int limit_;
};

// Lifecycle of one call: Created -> Active -> (Warned) -> Closed(reason).
// Not thread-safe; a session has exactly one owner that serializes calls.
class Session {
 public:
  Session(std::string id, ValidatedPersona persona, GuardrailPolicy policy, std::string goal,
          std::shared_ptr<const Clock> clock, SessionTiming timing = {});

  // Created -> Active. Starts the call timer.
  void activate();

  // Timer check at `now`. WarningDue and CloseDue are each emitted at most once;
  // WarningDue moves Active to Warned. Sessions that are not running return {}.
  std::vector<TimerEvent> tick(Millis now);
  std::vector<TimerEvent> tick() { return tick(clock_->now()); }

  // Counts a strike for a flagged utterance. CloseDue once the limit is hit;
  // the caller then closes with AbuseLimit.
  ModerationOutcome record_moderation_result(bool flagged);

  // Active/Warned -> Closed(reason). Throws Error(AlreadyClosed) when closed and
  // Error(InvalidTransition) when never activated. Returns the frozen transcript.
  const Transcript& close(CloseReason reason);

  // Appends to the transcript of a running session.
  void append(Turn turn);

  // Drops the transcript of a closed session once it is no longer needed.
  void discard_transcript();

  // Milliseconds since activation.
  std::int64_t elapsed_ms() const;

  const std::string& id() const noexcept { return id_; }
  SessionPhase phase() const noexcept { return phase_; }
  bool running() const noexcept {
    return phase_ == SessionPhase::Active || phase_ == SessionPhase::Warned;
  }
  std::optional<CloseReason> close_reason() const noexcept { return close_reason_; }
  int strikes() const noexcept { return abuse_.strikes(); }
  const Transcript& transcript() const noexcept { return transcript_; }
  bool transcript_discarded() const noexcept { return transcript_discarded_; }
  const ValidatedPersona& persona() const noexcept { return persona_; }
  const GuardrailPolicy& policy() const noexcept { return policy_; }
  const std::string& goal() const noexcept { return goal_; }
  const std::string& system_prompt() const noexcept { return system_prompt_; }
  const SessionTiming& timing() const noexcept { return timing_; }
  const Clock& clock() const noexcept { return *clock_; }

 private:
  std::string id_;
  ValidatedPersona persona_;
  GuardrailPolicy policy_;
  std::string goal_;
  std::string system_prompt_;
  std::shared_ptr<const Clock> clock_;
  SessionTiming timing_;
  SessionPhase phase_ = SessionPhase::Created;
  std::optional<CloseReason> close_reason_;
  Millis started_at_{0};
  bool warning_emitted_ = false;
  bool close_emitted_ = false;
  AbuseCounter abuse_;
  Transcript transcript_;
  bool transcript_discarded_ = false;
};

// Fresh session in the Created state with an empty transcript. Nothing from
// any other session is reachable from it.
Session create_session(std::string id, ValidatedPersona persona, GuardrailPolicy policy,
                       std::string goal, std::shared_ptr<const Clock> clock,
                       SessionTiming timing = {});

}  // namespace vagent
