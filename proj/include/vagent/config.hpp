#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vagent/conversation.hpp"
#include "vagent/http_providers.hpp"
#include "vagent/persona.hpp"
#include "vagent/providers.hpp"
#include "vagent/session.hpp"

namespace vagent {

enum class ProviderKind { Mock, Http };

struct ProviderSettings {
  ProviderKind kind = ProviderKind::Mock;
  std::optional<std::filesystem::path> cues;       // mock LLM
  std::optional<std::filesystem::path> blocklist;  // mock moderation
  std::optional<http::Endpoint> endpoint;          // http
};

struct ServerConfig {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 8765;
  std::filesystem::path clip_library;
  GuardrailPolicy policy = GuardrailPolicy::defaults();
  std::vector<std::string> supported_languages = default_supported_languages();
  std::map<std::string, PersonaSpec> personas;
  SessionTiming timing;
  Millis tick_interval{250};
  ProviderBudgets budgets;
  ProviderSettings stt, llm, tts, moderation;
  std::optional<std::filesystem::path> export_dir;
};

// Process environment lookup (std::getenv).
std::optional<std::string> process_env(std::string_view name);

// Reads the JSON config file, resolving relative paths against its directory,
// then applies VAGENT_* environment overrides. Throws Error(ConfigError).
ServerConfig load_config(const std::filesystem::path& path,
                         const http::EnvLookup& env = process_env);

// Loads the clip library and builds the providers. Throws Error(ConfigError),
// naming the clip library path when it cannot be loaded.
std::shared_ptr<Engine> build_engine(const ServerConfig& config);

// Same, but every provider is the deterministic mock regardless of config.
std::shared_ptr<Engine> build_mock_engine(const ServerConfig& config);

// Reads a persona JSON file. Throws Error(ConfigError).
PersonaSpec load_persona_file(const std::filesystem::path& path);

}  // namespace vagent
