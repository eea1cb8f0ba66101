#include "vagent/providers.hpp"

#include <algorithm>
#include <cmath>

#include "text_util.hpp"

namespace vagent {

void check_audio_stream(std::span<const AudioChunk> chunks, std::uint32_t expected_rate) {
  if (chunks.empty()) throw Error(ErrorCode::StreamCorrupt, "audio stream has no final chunk");
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const AudioChunk& c = chunks[i];
    if (c.seq != i) {
      throw Error(ErrorCode::StreamCorrupt, "sequence gap: expected seq " + std::to_string(i) +
                                                ", got " + std::to_string(c.seq));
    }
    if (c.sample_rate != expected_rate) {
      throw Error(ErrorCode::StreamCorrupt, "chunk " + std::to_string(c.seq) + " has sample rate " +
                                                std::to_string(c.sample_rate));
    }
    const bool last = i + 1 == chunks.size();
    if (c.final != last) {
      throw Error(ErrorCode::StreamCorrupt,
                  last ? "stream does not end with a final chunk"
                       : "final chunk at seq " + std::to_string(c.seq) + " is not the last");
    }
  }
}

std::string transcribe(const std::shared_ptr<SttProvider>& provider, AudioUtterance utterance,
                       std::string language, Millis budget) {
  check_audio_stream(utterance.chunks, kSttSampleRate);
  const bool silent = std::all_of(utterance.chunks.begin(), utterance.chunks.end(),
                                  [](const AudioChunk& c) { return c.samples.empty(); });
  if (silent) return {};
  auto call = start_budgeted(
      [provider, utterance = std::move(utterance), language = std::move(language)] {
        return provider->transcribe(utterance, language);
      },
      budget, "STT");
  return call.get();
}

void check_synthesis(const Synthesis& synthesis) {
  if (synthesis.duration_ms <= 0) {
    throw Error(ErrorCode::ProviderUnavailable, "TTS returned a non-positive duration");
  }
  try {
    check_audio_stream(synthesis.chunks, kTtsSampleRate);
  } catch (const Error& e) {
    throw Error(ErrorCode::ProviderUnavailable, std::string("TTS stream invalid: ") + e.what());
  }
  std::int64_t total = 0;
  for (const auto& c : synthesis.chunks) total += static_cast<std::int64_t>(c.samples.size());
  const std::int64_t expected = synthesis.duration_ms * kTtsSampleRate / 1000;
  if (std::llabs(total - expected) > 1) {
    throw Error(ErrorCode::ProviderUnavailable,
                "TTS sample count " + std::to_string(total) + " does not match duration " +
                    std::to_string(synthesis.duration_ms) + " ms");
  }
}

PendingCall<Synthesis> synthesize_async(const std::shared_ptr<TtsProvider>& provider,
                                        SynthesisRequest request, Millis budget) {
  if (text::trim(request.text).empty()) {
    throw Error(ErrorCode::InvalidArgument, "synthesis text is empty");
  }
  return start_budgeted(
      [provider, request = std::move(request)] {
        Synthesis s = provider->synthesize(request);
        check_synthesis(s);
        return s;
      },
      budget, "TTS");
}

Synthesis synthesize(const std::shared_ptr<TtsProvider>& provider, SynthesisRequest request,
                     Millis budget) {
  return synthesize_async(provider, std::move(request), budget).get();
}

std::string complete(const std::shared_ptr<LlmProvider>& provider, LlmRequest request,
                     Millis budget) {
  if (request.messages.empty()) {
    throw Error(ErrorCode::InvalidArgument, "LLM request has no messages");
  }
  auto call = start_budgeted(
      [provider, request = std::move(request)] { return provider->complete(request); }, budget,
      "LLM");
  std::string raw = call.get();
  if (text::trim(raw).empty()) throw Error(ErrorCode::ProviderUnavailable, "LLM returned no text");
  return raw;
}

double moderate(const std::shared_ptr<ModerationProvider>& provider, std::string utterance,
                Millis budget) {
  if (text::trim(utterance).empty()) {
    throw Error(ErrorCode::InvalidArgument, "moderation input is empty");
  }
  auto call = start_budgeted(
      [provider, utterance = std::move(utterance)] { return provider->score(utterance); }, budget,
      "moderation");
  const double score = call.get();
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorCode::ProviderUnavailable, "moderation score outside [0,1]");
  }
  return score;
}

std::vector<AudioChunk> chunk_pcm(std::span<const std::int16_t> samples, std::uint32_t sample_rate) {
  const std::size_t per_chunk = sample_rate / 10;
  std::vector<AudioChunk> chunks;
  std::size_t offset = 0;
  std::uint32_t seq = 0;
  do {
    const std::size_t n = std::min(per_chunk, samples.size() - offset);
    AudioChunk chunk;
    chunk.seq = seq++;
    chunk.sample_rate = sample_rate;
    chunk.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(offset),
                         samples.begin() + static_cast<std::ptrdiff_t>(offset + n));
    offset += n;
    chunk.final = offset >= samples.size();
    chunks.push_back(std::move(chunk));
  } while (offset < samples.size());
  return chunks;
}

}  // namespace vagent
