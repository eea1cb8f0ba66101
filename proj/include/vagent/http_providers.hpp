#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "vagent/providers.hpp"

namespace vagent::http {

// Where a real service lives. url is "http://host[:port]/path".
struct Endpoint {
  std::string url;
  std::string api_key;  // sent as "Authorization: Bearer <key>" when non-empty
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

// Reads VAGENT_<ROLE>_URL and VAGENT_<ROLE>_API_KEY, e.g. role "LLM".
// Throws Error(ConfigError) when the URL variable is unset.
Endpoint endpoint_from_env(std::string_view role, const EnvLookup& env);

// Generic JSON-over-HTTP adapters. Request/response shapes:
//   STT:  POST raw PCM16LE @16 kHz, ?language=<tag>  -> {"text": "..."}
//   LLM:  POST {"system", "messages":[{"role","content"}], "purpose"} -> {"text": "..."}
//   TTS:  POST {"text","emotion","voice_id","language"} -> raw PCM16LE @24 kHz
//   Moderation: POST {"text"} -> {"score": 0..1}
// Transport failures and non-2xx replies raise Error(ProviderUnavailable).
class HttpStt final : public SttProvider {
 public:
  HttpStt(Endpoint endpoint, Millis timeout) : endpoint_(std::move(endpoint)), timeout_(timeout) {}
  std::string transcribe(const AudioUtterance& utterance, std::string_view language) override;

 private:
  Endpoint endpoint_;
  Millis timeout_;
};

class HttpLlm final : public LlmProvider {
 public:
  HttpLlm(Endpoint endpoint, Millis timeout) : endpoint_(std::move(endpoint)), timeout_(timeout) {}
  std::string complete(const LlmRequest& request) override;

 private:
  Endpoint endpoint_;
  Millis timeout_;
};

// Pads the returned audio with silence to a whole millisecond so the duration
// and sample count agree exactly.
class HttpTts final : public TtsProvider {
 public:
  HttpTts(Endpoint endpoint, Millis timeout) : endpoint_(std::move(endpoint)), timeout_(timeout) {}
  Synthesis synthesize(const SynthesisRequest& request) override;

 private:
  Endpoint endpoint_;
  Millis timeout_;
};

class HttpModeration final : public ModerationProvider {
 public:
  HttpModeration(Endpoint endpoint, Millis timeout)
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}
  double score(std::string_view utterance) override;

 private:
  Endpoint endpoint_;
  Millis timeout_;
};

}  // namespace vagent::http
