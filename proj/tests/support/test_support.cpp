#include "test_support.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace vtest {

std::filesystem::path source_dir() { return VAGENT_SOURCE_DIR; }

std::filesystem::path asset(const std::string& relative) { return source_dir() / relative; }

PersonaSpec sample_persona() {
  PersonaSpec spec;
  spec.agent_name = "Morgan Lee";
  spec.personality_traits = {"warm", "skeptical"};
  spec.background = "Hiring manager at a design studio.";
  spec.premise = "A job interview for a junior designer position.";
  spec.user_info = {{"name", "Jordan"}};
  spec.language = "en-US";
  spec.avatar_id = "avatar_01";
  spec.voice_id = "voice_01";
  return spec;
}

std::shared_ptr<const ClipLibrary> sample_library() {
  static const auto library =
      std::make_shared<const ClipLibrary>(load_clip_library(asset("assets/clips/sample_library.json")));
  return library;
}

BlendshapeClip random_clip(std::mt19937_64& rng, Emotion emotion, int fps, std::size_t channels,
                           std::size_t frames, const std::string& clip_id) {
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  BlendshapeClip clip;
  clip.clip_id = clip_id;
  clip.emotion = emotion;
  clip.fps = fps;
  for (std::size_t c = 0; c < channels; ++c) clip.channels.push_back("ch" + std::to_string(c));
  for (std::size_t f = 0; f < frames; ++f) {
    BlendshapeFrame frame;
    for (std::size_t c = 0; c < channels; ++c) frame.weights.push_back(weight(rng));
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

std::string library_json(const std::vector<BlendshapeClip>& clips, int fps,
                         const std::vector<std::string>& channels) {
  nlohmann::json doc{{"fps", fps}, {"channels", channels}, {"clips", nlohmann::json::array()}};
  for (const auto& clip : clips) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : clip.frames) frames.push_back(f.weights);
    doc["clips"].push_back(
        {{"clip_id", clip.clip_id}, {"emotion", to_string(clip.emotion)}, {"frames", frames}});
  }
  return doc.dump();
}

ClipLibrary tiny_library(std::size_t extra, Emotion extra_emotion) {
  std::mt19937_64 rng(42);
  std::vector<BlendshapeClip> clips;
  for (Emotion e : kAllEmotions) {
    clips.push_back(random_clip(rng, e, 30, 3, 10, std::string(to_string(e)) + "_0"));
  }
  for (std::size_t i = 0; i < extra; ++i) {
    clips.push_back(random_clip(rng, extra_emotion, 30, 3, 10,
                                std::string(to_string(extra_emotion)) + "_" + std::to_string(i + 1)));
  }
  return ClipLibrary::from_json_text(library_json(clips, 30, clips.front().channels));
}

std::shared_ptr<Engine> make_engine(EngineParts parts) {
  auto engine = std::make_shared<Engine>();
  engine->services.stt = parts.stt;
  engine->services.llm = parts.llm;
  engine->services.tts = parts.tts;
  engine->services.moderation = parts.moderation;
  engine->services.clips = parts.clips;
  engine->services.budgets = parts.budgets;
  engine->timing = parts.timing;
  engine->policy = parts.policy;
  return engine;
}

MessageSink Capture::sink() {
  return [this](ServerMessage m) {
    std::lock_guard lock(mutex_);
    messages_.push_back(std::move(m));
  };
}

std::vector<ServerMessage> Capture::messages() const {
  std::lock_guard lock(mutex_);
  return messages_;
}

std::vector<ServerMessage> Capture::take() {
  std::lock_guard lock(mutex_);
  return std::exchange(messages_, {});
}

void Capture::clear() {
  std::lock_guard lock(mutex_);
  messages_.clear();
}

std::vector<std::string> types_of(const std::vector<ServerMessage>& messages) {
  std::vector<std::string> out;
  for (const auto& m : messages) out.emplace_back(message_type(m));
  return out;
}

std::size_t expected_frames(std::int64_t duration_ms, int fps) {
  const long double exact = static_cast<long double>(duration_ms) * fps / 1000.0L;
  return static_cast<std::size_t>(std::ceil(exact));
}

std::string check_reply_stream(const std::vector<ServerMessage>& turn, int fps) {
  std::ostringstream why;
  if (turn.size() < 3) return "reply stream too short";
  if (!std::holds_alternative<msg::UserTranscript>(turn.front())) return "does not start with user_transcript";
  const auto* start = std::get_if<msg::AgentReplyStart>(&turn[1]);
  if (!start) return "second message is not agent_reply_start";
  if (!std::holds_alternative<msg::AgentReplyEnd>(turn.back())) return "does not end with agent_reply_end";

  std::uint32_t next_seq = 0;
  bool saw_final = false;
  std::uint64_t samples = 0;
  std::uint64_t next_frame = 0;
  for (std::size_t i = 2; i + 1 < turn.size(); ++i) {
    if (const auto* audio = std::get_if<msg::AgentAudioChunk>(&turn[i])) {
      if (saw_final) return "audio after the final chunk";
      if (audio->chunk.seq != next_seq) {
        why << "audio seq " << audio->chunk.seq << " where " << next_seq << " was expected";
        return why.str();
      }
      if (audio->chunk.sample_rate != 24000) return "agent audio not at 24 kHz";
      ++next_seq;
      saw_final = audio->chunk.final;
      samples += audio->chunk.samples.size();
    } else if (const auto* anim = std::get_if<msg::AgentAnimationChunk>(&turn[i])) {
      if (anim->first_frame_index != next_frame) {
        why << "animation chunk starts at " << anim->first_frame_index << " where " << next_frame
            << " was expected";
        return why.str();
      }
      if (anim->frames.empty() || anim->frames.size() > 30) return "animation chunk size out of range";
      for (const auto& f : anim->frames) {
        for (double w : f.weights) {
          if (!(w >= 0.0 && w <= 1.0)) return "animation weight outside [0,1]";
        }
      }
      next_frame += anim->frames.size();
    } else {
      why << "unexpected " << message_type(turn[i]) << " inside a reply";
      return why.str();
    }
  }
  if (!saw_final) return "no final audio chunk";
  const double audio_ms = static_cast<double>(samples) * 1000.0 / 24000.0;
  if (std::abs(audio_ms - static_cast<double>(start->duration_ms)) > 1.0) {
    why << "audio lasts " << audio_ms << " ms but the reply announced " << start->duration_ms;
    return why.str();
  }
  if (next_frame != expected_frames(start->duration_ms, fps)) {
    why << next_frame << " animation frames for " << start->duration_ms << " ms";
    return why.str();
  }
  return "";
}

std::vector<std::vector<ServerMessage>> split_turns(const std::vector<ServerMessage>& messages) {
  std::vector<std::vector<ServerMessage>> turns;
  for (const auto& m : messages) {
    if (std::holds_alternative<msg::UserTranscript>(m)) turns.emplace_back();
    if (!turns.empty()) turns.back().push_back(m);
  }
  return turns;
}

// ---- providers ----

std::string FunctionLlm::complete(const LlmRequest& request) {
  {
    std::lock_guard lock(mutex_);
    recorded_.push_back(request);
  }
  return fn_(request);
}

std::vector<LlmRequest> FunctionLlm::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

std::string ThrowingLlm::complete(const LlmRequest&) { throw std::runtime_error("connection refused"); }

std::string SleepingLlm::complete(const LlmRequest& request) {
  std::this_thread::sleep_for(delay_);
  return "EMOTION: Neutral\n" + request.messages.back().content;
}

namespace {

template <class F>
auto timed(const DelayFn& delay, ProviderClock& clock, F&& call) {
  const auto begin = std::chrono::steady_clock::now();
  if (delay) std::this_thread::sleep_for(delay());
  struct Stop {
    ProviderClock& clock;
    std::chrono::steady_clock::time_point begin;
    ~Stop() { clock.add(std::chrono::steady_clock::now() - begin); }
  } stop{clock, begin};
  return call();
}

class TimedStt final : public SttProvider {
 public:
  TimedStt(std::shared_ptr<SttProvider> inner, DelayFn d, std::shared_ptr<ProviderClock> c)
      : inner_(std::move(inner)), delay_(std::move(d)), clock_(std::move(c)) {}
  std::string transcribe(const AudioUtterance& u, std::string_view lang) override {
    return timed(delay_, *clock_, [&] { return inner_->transcribe(u, lang); });
  }

 private:
  std::shared_ptr<SttProvider> inner_;
  DelayFn delay_;
  std::shared_ptr<ProviderClock> clock_;
};

class TimedLlm final : public LlmProvider {
 public:
  TimedLlm(std::shared_ptr<LlmProvider> inner, DelayFn d, std::shared_ptr<ProviderClock> c)
      : inner_(std::move(inner)), delay_(std::move(d)), clock_(std::move(c)) {}
  std::string complete(const LlmRequest& r) override {
    return timed(delay_, *clock_, [&] { return inner_->complete(r); });
  }

 private:
  std::shared_ptr<LlmProvider> inner_;
  DelayFn delay_;
  std::shared_ptr<ProviderClock> clock_;
};

class TimedTts final : public TtsProvider {
 public:
  TimedTts(std::shared_ptr<TtsProvider> inner, DelayFn d, std::shared_ptr<ProviderClock> c)
      : inner_(std::move(inner)), delay_(std::move(d)), clock_(std::move(c)) {}
  Synthesis synthesize(const SynthesisRequest& r) override {
    return timed(delay_, *clock_, [&] { return inner_->synthesize(r); });
  }

 private:
  std::shared_ptr<TtsProvider> inner_;
  DelayFn delay_;
  std::shared_ptr<ProviderClock> clock_;
};

class TimedModeration final : public ModerationProvider {
 public:
  TimedModeration(std::shared_ptr<ModerationProvider> inner, DelayFn d, std::shared_ptr<ProviderClock> c)
      : inner_(std::move(inner)), delay_(std::move(d)), clock_(std::move(c)) {}
  double score(std::string_view u) override {
    return timed(delay_, *clock_, [&] { return inner_->score(u); });
  }

 private:
  std::shared_ptr<ModerationProvider> inner_;
  DelayFn delay_;
  std::shared_ptr<ProviderClock> clock_;
};

}  // namespace

Wrapped wrap_providers(EngineParts& parts, DelayFn delay, std::shared_ptr<ProviderClock> clock) {
  Wrapped w{std::make_shared<TimedStt>(parts.stt, delay, clock), std::make_shared<TimedLlm>(parts.llm, delay, clock),
            std::make_shared<TimedTts>(parts.tts, delay, clock),
            std::make_shared<TimedModeration>(parts.moderation, delay, clock)};
  parts.stt = w.stt;
  parts.llm = w.llm;
  parts.tts = w.tts;
  parts.moderation = w.moderation;
  return w;
}

DelayFn random_delay(std::uint64_t seed, std::int64_t max_us) {
  struct State {
    std::mutex mutex;
    std::mt19937_64 rng;
  };
  auto state = std::make_shared<State>();
  state->rng.seed(seed);
  return [state, max_us] {
    std::lock_guard lock(state->mutex);
    return std::chrono::microseconds(std::uniform_int_distribution<std::int64_t>(0, max_us)(state->rng));
  };
}

}  // namespace vtest
