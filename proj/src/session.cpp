#include "vagent/session.hpp"

#include "vagent/error.hpp"

namespace vagent {

Millis SteadyClock::now() const {
  return std::chrono::duration_cast<Millis>(
      std::chrono::steady_clock::now().time_since_epoch());
}

std::string_view to_string(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::Created: return "Created";
    case SessionPhase::Active: return "Active";
    case SessionPhase::Warned: return "Warned";
    case SessionPhase::Closed: return "Closed";
  }
  return "Closed";
}

std::string_view to_string(CloseReason reason) {
  switch (reason) {
    case CloseReason::UserEnded: return "UserEnded";
    case CloseReason::TimeLimit: return "TimeLimit";
    case CloseReason::AbuseLimit: return "AbuseLimit";
    case CloseReason::TransportLost: return "TransportLost";
    case CloseReason::ServerShutdown: return "ServerShutdown";
  }
  return "UserEnded";
}

std::optional<CloseReason> parse_close_reason(std::string_view name) {
  for (auto r : {CloseReason::UserEnded, CloseReason::TimeLimit, CloseReason::AbuseLimit,
                 CloseReason::TransportLost, CloseReason::ServerShutdown}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

void check_timing(const SessionTiming& timing) {
  if (timing.warn_after <= Millis{0} || timing.warn_after >= timing.close_after) {
    throw Error(ErrorCode::ConfigError, "session timing requires 0 < warn_after < close_after");
  }
}

AbuseCounter::AbuseCounter(int limit) : limit_(limit) {
  if (limit < 1) throw Error(ErrorCode::InvalidArgument, "abuse strike limit must be >= 1");
}

bool AbuseCounter::record(bool flagged) {
  if (!flagged || strikes_ >= limit_) return false;
  ++strikes_;
  return strikes_ == limit_;
}

Session::Session(std::string id, ValidatedPersona persona, GuardrailPolicy policy,
                 std::string goal, std::shared_ptr<const Clock> clock, SessionTiming timing)
    : id_(std::move(id)),
      persona_(std::move(persona)),
      policy_(std::move(policy)),
      goal_(std::move(goal)),
      clock_(std::move(clock)),
      timing_(timing),
      abuse_(policy_.abuse_strike_limit),
      transcript_(id_) {
  if (!clock_) throw Error(ErrorCode::InvalidArgument, "session needs a clock");
  check_timing(timing_);
  system_prompt_ = assemble_system_prompt(persona_, policy_, goal_);
}

void Session::activate() {
  if (phase_ != SessionPhase::Created) {
    throw Error(ErrorCode::InvalidTransition,
                "cannot activate a session in state " + std::string(to_string(phase_)));
  }
  phase_ = SessionPhase::Active;
  started_at_ = clock_->now();
}

std::int64_t Session::elapsed_ms() const {
  if (phase_ == SessionPhase::Created) return 0;
  return (clock_->now() - started_at_).count();
}

std::vector<TimerEvent> Session::tick(Millis now) {
  std::vector<TimerEvent> events;
  if (!running()) return events;
  const Millis elapsed = now - started_at_;
  if (!warning_emitted_ && elapsed >= timing_.warn_after) {
    warning_emitted_ = true;
    phase_ = SessionPhase::Warned;
    events.push_back(TimerEvent::WarningDue);
  }
  if (!close_emitted_ && elapsed >= timing_.close_after) {
    close_emitted_ = true;
    events.push_back(TimerEvent::CloseDue);
  }
  return events;
}

ModerationOutcome Session::record_moderation_result(bool flagged) {
  if (!running()) {
    throw Error(ErrorCode::InvalidTransition, "moderation result for a session that is not running");
  }
  return abuse_.record(flagged) ? ModerationOutcome::CloseDue : ModerationOutcome::Continue;
}

const Transcript& Session::close(CloseReason reason) {
  if (phase_ == SessionPhase::Closed) {
    throw Error(ErrorCode::AlreadyClosed, "session " + id_ + " is already closed");
  }
  if (phase_ == SessionPhase::Created) {
    throw Error(ErrorCode::InvalidTransition, "session " + id_ + " was never activated");
  }
  phase_ = SessionPhase::Closed;
  close_reason_ = reason;
  return transcript_;
}

void Session::append(Turn turn) {
  if (!running()) {
    throw Error(ErrorCode::InvalidTransition, "cannot append to a session that is not running");
  }
  // Copy in: append_turn may throw and the current transcript must survive.
  transcript_ = append_turn(transcript_, std::move(turn));
}

void Session::discard_transcript() {
  if (phase_ != SessionPhase::Closed) {
    throw Error(ErrorCode::InvalidTransition, "transcript can only be discarded after close");
  }
  transcript_ = Transcript(id_);
  transcript_discarded_ = true;
}

Session create_session(std::string id, ValidatedPersona persona, GuardrailPolicy policy,
                       std::string goal, std::shared_ptr<const Clock> clock,
                       SessionTiming timing) {
  return Session(std::move(id), std::move(persona), std::move(policy), std::move(goal),
                 std::move(clock), timing);
}

}  // namespace vagent
