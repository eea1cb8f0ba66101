#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vagent/conversation.hpp"
#include "vagent/persona.hpp"

namespace vagent {

struct ScriptedUtterance {
  std::string text;
  std::optional<std::int64_t> at_ms;  // absolute simulated time; default previous + advance_ms
  bool audio = false;                 // send as silent audio with sidecar text
};

struct ReplayScript {
  std::optional<PersonaSpec> persona;
  std::optional<std::string> persona_id;
  std::string goal;
  std::int64_t advance_ms = 20000;
  std::vector<ScriptedUtterance> utterances;
  std::optional<std::int64_t> end_at_ms;  // let the clock run before ending the call
};

// Throws Error(ScriptParseError).
ReplayScript parse_replay_script(std::string_view json_text);
ReplayScript load_replay_script(const std::filesystem::path& path);

// Drives one in-process session through the protocol handler on a simulated
// clock, ticking every tick_interval, then ends the call and requests
// feedback. Returns the printable, deterministic transcript.
std::string run_replay(const ReplayScript& script, std::shared_ptr<const Engine> engine,
                       Millis tick_interval, std::uint64_t seed);

// load_config + build_mock_engine + run_replay.
std::string replay_file(const std::filesystem::path& script_path, const std::filesystem::path& config_path,
                        std::uint64_t seed);

}  // namespace vagent
