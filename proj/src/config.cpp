#include "vagent/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vagent/mock_providers.hpp"

namespace vagent {

using nlohmann::json;

std::optional<std::string> process_env(std::string_view name) {
  const char* value = std::getenv(std::string(name).c_str());
  if (value == nullptr) return std::nullopt;
  return std::string(value);
}

namespace {

json read_json_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + std::string(what) + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::int64_t parse_int(std::string_view name, const std::string& value) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::ConfigError, std::string(name) + " must be an integer, got \"" + value + "\"");
  }
  return out;
}

double parse_double(std::string_view name, const std::string& value) {
  try {
    std::size_t used = 0;
    double out = std::stod(value, &used);
    if (used == value.size()) return out;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigError, std::string(name) + " must be a number, got \"" + value + "\"");
}

ProviderKind parse_kind(const std::string& kind, std::string_view role) {
  if (kind == "mock") return ProviderKind::Mock;
  if (kind == "http") return ProviderKind::Http;
  throw Error(ErrorCode::ConfigError,
              "unknown provider kind \"" + kind + "\" for " + std::string(role) + " (mock|http)");
}

ProviderSettings parse_provider(const json& j, const std::filesystem::path& base, std::string_view role) {
  ProviderSettings s;
  if (j.is_null()) return s;
  s.kind = parse_kind(j.value("kind", std::string("mock")), role);
  if (j.contains("cues")) s.cues = resolve(base, j["cues"].get<std::string>());
  if (j.contains("blocklist")) s.blocklist = resolve(base, j["blocklist"].get<std::string>());
  if (j.contains("url")) s.endpoint = http::Endpoint{j["url"].get<std::string>(), {}};
  return s;
}

void apply_provider_env(ProviderSettings& s, std::string_view role, const http::EnvLookup& env) {
  const std::string prefix = "VAGENT_" + std::string(role) + "_";
  if (auto kind = env(prefix + "PROVIDER")) s.kind = parse_kind(*kind, role);
  if (s.kind != ProviderKind::Http) return;
  http::Endpoint endpoint = s.endpoint.value_or(http::Endpoint{});
  if (auto url = env(prefix + "URL")) endpoint.url = *url;
  if (auto key = env(prefix + "API_KEY")) endpoint.api_key = *key;
  if (endpoint.url.empty()) {
    throw Error(ErrorCode::ConfigError, "http " + std::string(role) + " provider needs a url (config or " +
                                            prefix + "URL)");
  }
  s.endpoint = endpoint;
}

void parse_document(const json& doc, const std::filesystem::path& base, ServerConfig& cfg) {
  cfg.bind_address = doc.value("bind_address", cfg.bind_address);
  const auto port = doc.value("port", static_cast<int>(cfg.port));
  if (port < 0 || port > 65535) throw Error(ErrorCode::ConfigError, "port out of range");
  cfg.port = static_cast<std::uint16_t>(port);

  if (!doc.contains("clip_library")) throw Error(ErrorCode::ConfigError, "config lacks clip_library");
  cfg.clip_library = resolve(base, doc["clip_library"].get<std::string>());

  if (doc.contains("guardrails")) {
    const auto path = resolve(base, doc["guardrails"].get<std::string>());
    cfg.policy = read_json_file(path, "guardrail file").get<GuardrailPolicy>();
  }
  if (doc.contains("abuse_strike_limit")) cfg.policy.abuse_strike_limit = doc["abuse_strike_limit"].get<int>();
  if (doc.contains("moderation_threshold")) {
    cfg.policy.moderation_threshold = doc["moderation_threshold"].get<double>();
  }

  if (doc.contains("supported_languages")) {
    cfg.supported_languages = doc["supported_languages"].get<std::vector<std::string>>();
  }

  if (doc.contains("personas")) {
    for (const auto& [id, file] : doc["personas"].items()) {
      cfg.personas[id] = load_persona_file(resolve(base, file.get<std::string>()));
    }
  }

  if (doc.contains("timers")) {
    const auto& t = doc["timers"];
    cfg.timing.warn_after = Millis{t.value("warn_after_ms", cfg.timing.warn_after.count())};
    cfg.timing.close_after = Millis{t.value("close_after_ms", cfg.timing.close_after.count())};
    cfg.tick_interval = Millis{t.value("tick_interval_ms", cfg.tick_interval.count())};
  }

  if (doc.contains("budgets_ms")) {
    const auto& b = doc["budgets_ms"];
    cfg.budgets.stt = Millis{b.value("stt", cfg.budgets.stt.count())};
    cfg.budgets.llm = Millis{b.value("llm", cfg.budgets.llm.count())};
    cfg.budgets.tts = Millis{b.value("tts", cfg.budgets.tts.count())};
    cfg.budgets.moderation = Millis{b.value("moderation", cfg.budgets.moderation.count())};
  }

  if (doc.contains("providers")) {
    const auto& p = doc["providers"];
    cfg.stt = parse_provider(p.value("stt", json{}), base, "STT");
    cfg.llm = parse_provider(p.value("llm", json{}), base, "LLM");
    cfg.tts = parse_provider(p.value("tts", json{}), base, "TTS");
    cfg.moderation = parse_provider(p.value("moderation", json{}), base, "MODERATION");
  }

  if (doc.contains("export_transcripts_dir") && !doc["export_transcripts_dir"].is_null()) {
    cfg.export_dir = resolve(base, doc["export_transcripts_dir"].get<std::string>());
  }
}

void apply_env(ServerConfig& cfg, const http::EnvLookup& env) {
  if (auto v = env("VAGENT_BIND_ADDRESS")) cfg.bind_address = *v;
  if (auto v = env("VAGENT_PORT")) {
    const auto port = parse_int("VAGENT_PORT", *v);
    if (port < 0 || port > 65535) throw Error(ErrorCode::ConfigError, "VAGENT_PORT out of range");
    cfg.port = static_cast<std::uint16_t>(port);
  }
  if (auto v = env("VAGENT_CLIP_LIBRARY")) cfg.clip_library = *v;
  if (auto v = env("VAGENT_WARN_AFTER_MS")) cfg.timing.warn_after = Millis{parse_int("VAGENT_WARN_AFTER_MS", *v)};
  if (auto v = env("VAGENT_CLOSE_AFTER_MS")) cfg.timing.close_after = Millis{parse_int("VAGENT_CLOSE_AFTER_MS", *v)};
  if (auto v = env("VAGENT_TICK_INTERVAL_MS")) cfg.tick_interval = Millis{parse_int("VAGENT_TICK_INTERVAL_MS", *v)};
  if (auto v = env("VAGENT_ABUSE_STRIKE_LIMIT")) {
    cfg.policy.abuse_strike_limit = static_cast<int>(parse_int("VAGENT_ABUSE_STRIKE_LIMIT", *v));
  }
  if (auto v = env("VAGENT_MODERATION_THRESHOLD")) {
    cfg.policy.moderation_threshold = parse_double("VAGENT_MODERATION_THRESHOLD", *v);
  }
  if (auto v = env("VAGENT_EXPORT_TRANSCRIPTS_DIR")) cfg.export_dir = *v;
  apply_provider_env(cfg.stt, "STT", env);
  apply_provider_env(cfg.llm, "LLM", env);
  apply_provider_env(cfg.tts, "TTS", env);
  apply_provider_env(cfg.moderation, "MODERATION", env);
}

std::shared_ptr<const ClipLibrary> load_clips_for(const ServerConfig& config) {
  if (!std::filesystem::exists(config.clip_library)) {
    throw Error(ErrorCode::ConfigError, "clip library not found: " + config.clip_library.string());
  }
  try {
    return std::make_shared<const ClipLibrary>(load_clip_library(config.clip_library));
  } catch (const ClipLibraryError& e) {
    throw Error(ErrorCode::ConfigError,
                "clip library " + config.clip_library.string() + " is invalid: " + e.what());
  }
}

std::shared_ptr<Engine> engine_skeleton(const ServerConfig& config) {
  check_policy(config.policy);
  check_timing(config.timing);
  auto engine = std::make_shared<Engine>();
  engine->policy = config.policy;
  engine->supported_languages = config.supported_languages;
  engine->personas = config.personas;
  engine->timing = config.timing;
  engine->export_dir = config.export_dir;
  engine->services.budgets = config.budgets;
  engine->services.clips = load_clips_for(config);
  return engine;
}

std::shared_ptr<LlmProvider> mock_llm(const ProviderSettings& s) {
  return s.cues ? std::make_shared<mock::MockLlm>(mock::load_cue_table(*s.cues))
                : std::make_shared<mock::MockLlm>();
}

std::shared_ptr<ModerationProvider> mock_moderation(const ProviderSettings& s) {
  return s.blocklist ? std::make_shared<mock::MockModeration>(mock::load_blocklist(*s.blocklist))
                     : std::make_shared<mock::MockModeration>();
}

}  // namespace

PersonaSpec load_persona_file(const std::filesystem::path& path) {
  try {
    return read_json_file(path, "persona file").get<PersonaSpec>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

ServerConfig load_config(const std::filesystem::path& path, const http::EnvLookup& env) {
  ServerConfig cfg;
  const json doc = read_json_file(path, "config file");
  try {
    parse_document(doc, path.parent_path(), cfg);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  apply_env(cfg, env);
  return cfg;
}

std::shared_ptr<Engine> build_engine(const ServerConfig& config) {
  auto engine = engine_skeleton(config);
  auto& s = engine->services;
  const ProviderBudgets& b = config.budgets;

  if (config.stt.kind == ProviderKind::Http) {
    s.stt = std::make_shared<http::HttpStt>(*config.stt.endpoint, b.stt);
  } else {
    s.stt = std::make_shared<mock::MockStt>();
  }
  if (config.llm.kind == ProviderKind::Http) {
    s.llm = std::make_shared<http::HttpLlm>(*config.llm.endpoint, b.llm);
  } else {
    s.llm = mock_llm(config.llm);
  }
  if (config.tts.kind == ProviderKind::Http) {
    s.tts = std::make_shared<http::HttpTts>(*config.tts.endpoint, b.tts);
  } else {
    s.tts = std::make_shared<mock::MockTts>();
  }
  if (config.moderation.kind == ProviderKind::Http) {
    s.moderation = std::make_shared<http::HttpModeration>(*config.moderation.endpoint, b.moderation);
  } else {
    s.moderation = mock_moderation(config.moderation);
  }
  return engine;
}

std::shared_ptr<Engine> build_mock_engine(const ServerConfig& config) {
  auto engine = engine_skeleton(config);
  auto& s = engine->services;
  s.stt = std::make_shared<mock::MockStt>();
  s.llm = mock_llm(config.llm);
  s.tts = std::make_shared<mock::MockTts>();
  s.moderation = mock_moderation(config.moderation);
  return engine;
}

}  // namespace vagent
