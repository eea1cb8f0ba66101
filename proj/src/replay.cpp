#include "vagent/replay.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "text_util.hpp"
#include "vagent/config.hpp"
#include "vagent/feedback.hpp"
#include "vagent/mock_providers.hpp"

namespace vagent {

using nlohmann::json;

namespace {

Error script_error(const std::string& what) { return Error(ErrorCode::ScriptParseError, what); }

ScriptedUtterance parse_utterance(const json& j, std::size_t index) {
  const std::string where = "utterances[" + std::to_string(index) + "]";
  ScriptedUtterance u;
  if (j.is_string()) {
    u.text = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("text") || !j["text"].is_string()) throw script_error(where + " needs a \"text\" string");
    u.text = j["text"].get<std::string>();
    if (j.contains("at_ms")) u.at_ms = j["at_ms"].get<std::int64_t>();
    u.audio = j.value("audio", false);
  } else {
    throw script_error(where + " must be a string or an object");
  }
  return u;
}

std::string clock_label(std::int64_t ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "[%02lld:%02lld.%03lld]", static_cast<long long>(ms / 60000),
                static_cast<long long>(ms / 1000 % 60), static_cast<long long>(ms % 1000));
  return buf;
}

// Silent 16 kHz speech, sized like the mock TTS would size the same words.
AudioUtterance silent_audio_for(const std::string& text) {
  const auto ms = static_cast<std::int64_t>(text::word_count(text)) * mock::MockTts::kMillisPerWord;
  std::vector<std::int16_t> pcm(static_cast<std::size_t>(ms * kSttSampleRate / 1000), 0);
  return AudioUtterance{chunk_pcm(pcm, kSttSampleRate), text};
}

class ReplayDriver {
 public:
  ReplayDriver(const ReplayScript& script, std::shared_ptr<const Engine> engine, Millis tick,
               std::uint64_t seed)
      : script_(script),
        clock_(std::make_shared<SimulatedClock>()),
        tick_(tick),
        handler_(std::move(engine), clock_, "replay-" + std::to_string(seed), seed,
                 [this](ServerMessage m) { pending_.push_back(std::move(m)); }) {}

  std::string run() {
    msg::Hello hello{script_.persona, script_.persona_id, script_.goal};
    handler_.handle(hello);
    const bool ready = !pending_.empty() && std::holds_alternative<msg::SessionReady>(pending_.front());
    if (!ready) {
      const auto* err = pending_.empty() ? nullptr : std::get_if<msg::Error>(&pending_.front());
      throw Error(ErrorCode::InvalidPersona, err ? err->message : "session did not start");
    }
    flush();
    out_ << "goal: " << (script_.goal.empty() ? "(none)" : script_.goal) << "\n\n";

    std::int64_t target = 0;
    std::size_t sent = 0;
    for (const auto& u : script_.utterances) {
      target = u.at_ms.value_or(target + script_.advance_ms);
      if (!advance_to(target)) break;
      if (u.audio) {
        AudioUtterance audio = silent_audio_for(u.text);
        for (auto& chunk : audio.chunks) handler_.handle(msg::UtteranceAudioChunk{std::move(chunk)});
        handler_.handle(msg::UtteranceEnd{audio.sidecar_text});
      } else {
        handler_.handle(msg::UtteranceText{u.text});
      }
      ++sent;
      flush();
    }
    if (sent < script_.utterances.size()) {
      out_ << "(" << script_.utterances.size() - sent << " scripted utterance(s) not sent: call ended)\n";
    }
    if (script_.end_at_ms && running()) advance_to(*script_.end_at_ms);
    if (running()) {
      handler_.handle(msg::EndCall{});
      flush();
    }
    handler_.handle(msg::RequestFeedback{});
    flush();
    return out_.str();
  }

 private:
  bool running() const {
    return handler_.conversation() && handler_.conversation()->session().running();
  }

  // Steps the clock one tick at a time so timer events land where a live
  // server would deliver them. Returns false once the session has closed.
  bool advance_to(std::int64_t target) {
    while (running() && clock_->now().count() < target) {
      clock_->set(Millis{std::min(target, clock_->now().count() + tick_.count())});
      handler_.tick();
      flush();
    }
    return running();
  }

  void flush() {
    const std::string stamp = clock_label(clock_->now().count());
    for (const ServerMessage& m : pending_) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, msg::SessionReady>) {
              out_ << "session: " << v.session_id << "\n";
              const auto& spec = handler_.conversation()->session().persona().spec();
              out_ << "persona: " << spec.agent_name << " (" << spec.language << ")\n";
            } else if constexpr (std::is_same_v<T, msg::UserTranscript>) {
              out_ << stamp << " USER: " << v.text << "\n";
            } else if constexpr (std::is_same_v<T, msg::AgentReplyStart>) {
              reply_ms_ = v.duration_ms;
              audio_samples_ = 0;
              frames_ = 0;
            } else if constexpr (std::is_same_v<T, msg::AgentAudioChunk>) {
              audio_samples_ += v.chunk.samples.size();
            } else if constexpr (std::is_same_v<T, msg::AgentAnimationChunk>) {
              frames_ += v.frames.size();
            } else if constexpr (std::is_same_v<T, msg::AgentReplyEnd>) {
              const Turn& turn = handler_.conversation()->session().transcript().turns().back();
              out_ << stamp << " AGENT (" << to_string(*turn.emotion) << "): " << turn.text << "\n";
              out_ << "           reply " << reply_ms_ << " ms, " << audio_samples_ << " samples, "
                   << frames_ << " frames\n";
            } else if constexpr (std::is_same_v<T, msg::TimeWarning>) {
              out_ << stamp << " TIME WARNING: " << v.remaining_ms / 1000 << " s remaining\n";
            } else if constexpr (std::is_same_v<T, msg::SessionClosed>) {
              out_ << stamp << " closed: " << to_string(v.reason) << "\n";
            } else if constexpr (std::is_same_v<T, msg::FeedbackReport>) {
              out_ << "\n" << render_feedback_text(v.report);
            } else if constexpr (std::is_same_v<T, msg::Error>) {
              out_ << stamp << " error " << v.code << ": " << v.message << "\n";
            }
          },
          m);
    }
    pending_.clear();
  }

  const ReplayScript& script_;
  std::shared_ptr<SimulatedClock> clock_;
  Millis tick_;
  std::vector<ServerMessage> pending_;
  ConnectionHandler handler_;
  std::ostringstream out_;
  std::int64_t reply_ms_ = 0;
  std::size_t audio_samples_ = 0;
  std::size_t frames_ = 0;
};

}  // namespace

ReplayScript parse_replay_script(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw script_error(std::string("malformed script: ") + e.what());
  }
  if (!j.is_object()) throw script_error("script must be a JSON object");

  ReplayScript script;
  try {
    if (j.contains("persona") && !j["persona"].is_null()) script.persona = j["persona"].get<PersonaSpec>();
    if (j.contains("persona_id") && !j["persona_id"].is_null()) {
      script.persona_id = j["persona_id"].get<std::string>();
    }
    script.goal = j.value("goal", std::string{});
    script.advance_ms = j.value("advance_ms", script.advance_ms);
    if (j.contains("end_at_ms")) script.end_at_ms = j["end_at_ms"].get<std::int64_t>();
  } catch (const json::exception& e) {
    throw script_error(e.what());
  }
  if (!script.persona && !script.persona_id) throw script_error("script needs a persona or a persona_id");
  if (script.advance_ms < 0) throw script_error("advance_ms must not be negative");

  if (!j.contains("utterances") || !j["utterances"].is_array()) {
    throw script_error("script needs an \"utterances\" array");
  }
  const auto& list = j["utterances"];
  if (list.empty()) throw script_error("script has no utterances");
  std::int64_t last = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      script.utterances.push_back(parse_utterance(list[i], i));
    } catch (const json::exception& e) {
      throw script_error("utterances[" + std::to_string(i) + "]: " + e.what());
    }
    const auto& u = script.utterances.back();
    if (u.at_ms) {
      if (*u.at_ms < last) throw script_error("utterances[" + std::to_string(i) + "].at_ms goes back in time");
      last = *u.at_ms;
    } else {
      last += script.advance_ms;
    }
  }
  return script;
}

ReplayScript load_replay_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw script_error("cannot open script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_replay_script(buf.str());
  } catch (const Error& e) {
    throw script_error(path.string() + ": " + e.what());
  }
}

std::string run_replay(const ReplayScript& script, std::shared_ptr<const Engine> engine, Millis tick_interval,
                       std::uint64_t seed) {
  if (tick_interval.count() <= 0) throw Error(ErrorCode::InvalidArgument, "tick interval must be positive");
  ReplayDriver driver(script, std::move(engine), tick_interval, seed);
  return driver.run();
}

std::string replay_file(const std::filesystem::path& script_path, const std::filesystem::path& config_path,
                        std::uint64_t seed) {
  const ReplayScript script = load_replay_script(script_path);
  const ServerConfig config = load_config(config_path);
  return run_replay(script, build_mock_engine(config), config.tick_interval, seed);
}

}  // namespace vagent
