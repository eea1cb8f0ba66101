#include "vagent/http_providers.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "text_util.hpp"

namespace vagent::http {

Endpoint endpoint_from_env(std::string_view role, const EnvLookup& env) {
  const std::string prefix = "VAGENT_" + std::string(role) + "_";
  auto url = env(prefix + "URL");
  if (!url || url->empty()) {
    throw Error(ErrorCode::ConfigError, prefix + "URL must be set for the http " +
                                            text::to_lower(role) + " provider");
  }
  return Endpoint{*url, env(prefix + "API_KEY").value_or("")};
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorCode::ConfigError, "provider URL must start with http://: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Result post(const Endpoint& endpoint, Millis timeout, const std::string& path_suffix,
                     const std::string& body, const std::string& content_type) {
  const SplitUrl u = split_url(endpoint.url);
  httplib::Client client(u.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  return client.Post(u.path + path_suffix, headers, body, content_type);
}

const httplib::Response& expect_ok(const httplib::Result& result, std::string_view role) {
  if (!result) {
    throw Error(ErrorCode::ProviderUnavailable,
                std::string(role) + " request failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::ProviderUnavailable,
                std::string(role) + " service returned HTTP " + std::to_string(result->status));
  }
  return *result;
}

nlohmann::json parse_body(const httplib::Response& res, std::string_view role) {
  try {
    return nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable,
                std::string(role) + " service returned malformed JSON: " + e.what());
  }
}

template <class T>
T field(const nlohmann::json& j, const char* name, std::string_view role) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ProviderUnavailable,
                std::string(role) + " reply lacks field \"" + name + "\"");
  }
}

std::string encode_pcm16le(const AudioUtterance& utterance) {
  std::string out;
  for (const auto& chunk : utterance.chunks) {
    for (std::int16_t s : chunk.samples) {
      const auto u = static_cast<std::uint16_t>(s);
      out.push_back(static_cast<char>(u & 0xFF));
      out.push_back(static_cast<char>(u >> 8));
    }
  }
  return out;
}

}  // namespace

std::string HttpStt::transcribe(const AudioUtterance& utterance, std::string_view language) {
  const std::string suffix = "?language=" + httplib::detail::encode_query_param(std::string(language));
  auto result = post(endpoint_, timeout_, suffix, encode_pcm16le(utterance), "audio/L16; rate=16000");
  return field<std::string>(parse_body(expect_ok(result, "STT"), "STT"), "text", "STT");
}

std::string HttpLlm::complete(const LlmRequest& request) {
  nlohmann::json body{{"system", request.system},
                      {"purpose", request.purpose == RequestPurpose::Feedback ? "feedback" : "dialogue"}};
  auto& messages = body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  auto result = post(endpoint_, timeout_, "", body.dump(), "application/json");
  return field<std::string>(parse_body(expect_ok(result, "LLM"), "LLM"), "text", "LLM");
}

Synthesis HttpTts::synthesize(const SynthesisRequest& request) {
  nlohmann::json body{{"text", request.text},
                      {"emotion", to_string(request.emotion)},
                      {"voice_id", request.voice_id},
                      {"language", request.language}};
  auto result = post(endpoint_, timeout_, "", body.dump(), "application/json");
  const auto& res = expect_ok(result, "TTS");
  if (res.body.size() % 2 != 0) {
    throw Error(ErrorCode::ProviderUnavailable, "TTS returned an odd number of PCM bytes");
  }
  std::vector<std::int16_t> samples(res.body.size() / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto lo = static_cast<std::uint8_t>(res.body[2 * i]);
    const auto hi = static_cast<std::uint8_t>(res.body[2 * i + 1]);
    samples[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  constexpr std::size_t per_ms = kTtsSampleRate / 1000;
  if (samples.empty()) samples.resize(per_ms, 0);
  samples.resize((samples.size() + per_ms - 1) / per_ms * per_ms, 0);

  Synthesis out;
  out.duration_ms = static_cast<std::int64_t>(samples.size() / per_ms);
  out.chunks = chunk_pcm(samples, kTtsSampleRate);
  return out;
}

double HttpModeration::score(std::string_view utterance) {
  nlohmann::json body{{"text", utterance}};
  auto result = post(endpoint_, timeout_, "", body.dump(), "application/json");
  return field<double>(parse_body(expect_ok(result, "moderation"), "moderation"), "score",
                       "moderation");
}

}  // namespace vagent::http
