#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "vagent/providers.hpp"

namespace vagent::mock {

// Echoes the utterance's sidecar text. Silent audio transcribes to "".
class MockStt final : public SttProvider {
 public:
  std::string transcribe(const AudioUtterance& utterance, std::string_view language) override;
};

// Scripted LLM. Dialogue requests are answered from a cue table keyed by the
// last user message; without a cue the reply echoes that message as Neutral.
// Feedback requests get a well-formed report citing the first and last user
// turns found in the prompt. Every request is recorded.
class MockLlm final : public LlmProvider {
 public:
  MockLlm() = default;
  explicit MockLlm(std::map<std::string, std::string> cues) : cues_(std::move(cues)) {}

  std::string complete(const LlmRequest& request) override;

  std::vector<LlmRequest> recorded() const;
  void clear_recorded();

 private:
  std::map<std::string, std::string> cues_;
  mutable std::mutex mutex_;
  std::vector<LlmRequest> recorded_;
};

// Silence at 24 kHz lasting 60 ms per whitespace-separated word.
class MockTts final : public TtsProvider {
 public:
  static constexpr std::int64_t kMillisPerWord = 60;
  Synthesis synthesize(const SynthesisRequest& request) override;
};

// 1.0 when the utterance contains any blocklisted term (case-insensitive),
// otherwise 0.0.
class MockModeration final : public ModerationProvider {
 public:
  MockModeration() = default;
  explicit MockModeration(std::vector<std::string> blocklist) : blocklist_(std::move(blocklist)) {}
  double score(std::string_view utterance) override;

 private:
  std::vector<std::string> blocklist_;
};

// {"cues": {"<utterance>": "<raw reply>", ...}}
std::map<std::string, std::string> load_cue_table(const std::filesystem::path& path);
// {"terms": ["...", ...]}
std::vector<std::string> load_blocklist(const std::filesystem::path& path);

}  // namespace vagent::mock
