#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <future>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "vagent/dialogue.hpp"
#include "vagent/emotion.hpp"
#include "vagent/error.hpp"
#include "vagent/session.hpp"

namespace vagent {

inline constexpr std::uint32_t kSttSampleRate = 16'000;
inline constexpr std::uint32_t kTtsSampleRate = 24'000;

// PCM16 mono audio. Sequence numbers start at 0 and increase by one; the last
// chunk of an utterance or reply has final set.
struct AudioChunk {
  std::uint32_t seq = 0;
  std::vector<std::int16_t> samples;
  std::uint32_t sample_rate = kSttSampleRate;
  bool final = false;

  bool operator==(const AudioChunk&) const = default;
};

// A complete user utterance as received. sidecar_text is optional test
// metadata that the mock recognizer echoes; real recognizers ignore it.
struct AudioUtterance {
  std::vector<AudioChunk> chunks;
  std::optional<std::string> sidecar_text;
};

struct SynthesisRequest {
  std::string text;
  Emotion emotion = Emotion::Neutral;
  std::string voice_id;
  std::string language;
};

struct Synthesis {
  std::vector<AudioChunk> chunks;
  std::int64_t duration_ms = 0;
};

class SttProvider {
 public:
  virtual ~SttProvider() = default;
  virtual std::string transcribe(const AudioUtterance& utterance, std::string_view language) = 0;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string complete(const LlmRequest& request) = 0;
};

class TtsProvider {
 public:
  virtual ~TtsProvider() = default;
  virtual Synthesis synthesize(const SynthesisRequest& request) = 0;
};

class ModerationProvider {
 public:
  virtual ~ModerationProvider() = default;
  // Offensiveness score in [0,1].
  virtual double score(std::string_view utterance) = 0;
};

struct ProviderBudgets {
  Millis stt{10'000};
  Millis llm{10'000};
  Millis tts{10'000};
  Millis moderation{10'000};
};

// A provider call running on its own thread with a wall-clock deadline fixed
// when the call started. get() throws Error(ProviderTimeout) past the deadline;
// an abandoned call finishes in the background and its result is dropped.
template <class R>
class PendingCall {
 public:
  PendingCall(std::future<R> future, std::chrono::steady_clock::time_point deadline,
              std::string role)
      : future_(std::move(future)), deadline_(deadline), role_(std::move(role)) {}

  R get() {
    if (future_.wait_until(deadline_) == std::future_status::timeout) {
      throw Error(ErrorCode::ProviderTimeout, role_ + " provider exceeded its time budget");
    }
    try {
      return future_.get();
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ProviderUnavailable, role_ + " provider failed: " + e.what());
    } catch (...) {
      throw Error(ErrorCode::ProviderUnavailable, role_ + " provider failed");
    }
  }

 private:
  std::future<R> future_;
  std::chrono::steady_clock::time_point deadline_;
  std::string role_;
};

template <class F>
auto start_budgeted(F fn, Millis budget, std::string role) -> PendingCall<decltype(fn())> {
  using R = decltype(fn());
  auto promise = std::make_shared<std::promise<R>>();
  auto future = promise->get_future();
  const auto deadline = std::chrono::steady_clock::now() + budget;
  std::thread([promise, fn = std::move(fn)]() mutable {
    try {
      promise->set_value(fn());
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();
  return PendingCall<R>(std::move(future), deadline, std::move(role));
}

// Throws Error(StreamCorrupt) unless seq runs 0,1,2,... and exactly the last
// chunk is final.
void check_audio_stream(std::span<const AudioChunk> chunks, std::uint32_t expected_rate);

// Contract wrappers: check the pre- and postconditions around each provider
// call and enforce the time budget.
std::string transcribe(const std::shared_ptr<SttProvider>& provider, AudioUtterance utterance,
                       std::string language, Millis budget);

PendingCall<Synthesis> synthesize_async(const std::shared_ptr<TtsProvider>& provider,
                                        SynthesisRequest request, Millis budget);
Synthesis synthesize(const std::shared_ptr<TtsProvider>& provider, SynthesisRequest request,
                     Millis budget);

std::string complete(const std::shared_ptr<LlmProvider>& provider, LlmRequest request,
                     Millis budget);

double moderate(const std::shared_ptr<ModerationProvider>& provider, std::string utterance,
                Millis budget);

// Throws Error(ProviderUnavailable) when the synthesis violates the duration /
// sample-count contract.
void check_synthesis(const Synthesis& synthesis);

// Splits PCM into 100 ms chunks, marking the last one final. An empty buffer
// yields one empty final chunk.
std::vector<AudioChunk> chunk_pcm(std::span<const std::int16_t> samples, std::uint32_t sample_rate);

}  // namespace vagent
