#include "vagent/vagent.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "vagent/config.hpp"
#include "vagent/expression.hpp"
#include "vagent/replay.hpp"
#include "vagent/server.hpp"

struct vagent_server {
  std::unique_ptr<vagent::Server> server;
};

namespace {

thread_local std::string last_error;

vagent_status status_for(vagent::ErrorCode code) {
  using vagent::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError: return VAGENT_ERR_CONFIG;
    case ErrorCode::BindError: return VAGENT_ERR_BIND;
    case ErrorCode::ScriptParseError: return VAGENT_ERR_SCRIPT_PARSE;
    case ErrorCode::InvalidPersona: return VAGENT_ERR_INVALID_PERSONA;
    case ErrorCode::ParseError:
    case ErrorCode::MissingEmotion:
    case ErrorCode::ChannelMismatch:
    case ErrorCode::WeightOutOfRange: return VAGENT_ERR_CLIP_LIBRARY;
    case ErrorCode::InvalidArgument: return VAGENT_ERR_INVALID_ARGUMENT;
    default: return VAGENT_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

vagent_status fail(vagent_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
vagent_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const vagent::Error& e) {
    return fail(status_for(e.code()), std::string(vagent::to_string(e.code())) + ": " + e.what());
  } catch (const std::exception& e) {
    return fail(VAGENT_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* vagent_last_error(void) { return last_error.c_str(); }

const char* vagent_version(void) { return "0.1.0"; }

void vagent_string_free(char* s) { std::free(s); }

vagent_status vagent_validate_clips(const char* path, char** report) {
  if (!path || !report) return fail(VAGENT_ERR_INVALID_ARGUMENT, "path and report are required");
  *report = nullptr;
  return guarded([&] {
    try {
      const auto library = vagent::load_clip_library(path);
      *report = dup_string("OK, " + std::to_string(library.emotion_count()) + " emotions, " +
                           std::to_string(library.clip_count()) + " clips\n");
      return VAGENT_OK;
    } catch (const vagent::ClipLibraryError& e) {
      std::string lines;
      for (const auto& issue : e.issues()) lines += issue.describe() + "\n";
      *report = dup_string(lines);
      return fail(VAGENT_ERR_CLIP_LIBRARY, e.what());
    }
  });
}

vagent_status vagent_replay(const char* script_path, const char* config_path, uint64_t seed,
                            char** transcript) {
  if (!script_path || !config_path || !transcript) {
    return fail(VAGENT_ERR_INVALID_ARGUMENT, "script, config and output are required");
  }
  *transcript = nullptr;
  return guarded([&] {
    *transcript = dup_string(vagent::replay_file(script_path, config_path, seed));
    return VAGENT_OK;
  });
}

vagent_status vagent_server_create(const char* config_path, vagent_server** out) {
  if (!config_path || !out) return fail(VAGENT_ERR_INVALID_ARGUMENT, "config path and output are required");
  *out = nullptr;
  return guarded([&] {
    const vagent::ServerConfig config = vagent::load_config(config_path);
    vagent::ServerOptions options;
    options.bind_address = config.bind_address;
    options.port = config.port;
    options.tick_interval = config.tick_interval;
    options.engine = vagent::build_engine(config);
    auto handle = std::make_unique<vagent_server>();
    handle->server = std::make_unique<vagent::Server>(std::move(options));
    *out = handle.release();
    return VAGENT_OK;
  });
}

vagent_status vagent_server_start(vagent_server* server) {
  if (!server) return fail(VAGENT_ERR_INVALID_ARGUMENT, "server is null");
  return guarded([&] {
    server->server->start();
    return VAGENT_OK;
  });
}

uint16_t vagent_server_port(const vagent_server* server) { return server ? server->server->port() : 0; }

vagent_status vagent_server_shutdown(vagent_server* server) {
  if (!server) return fail(VAGENT_ERR_INVALID_ARGUMENT, "server is null");
  return guarded([&] {
    server->server->shutdown();
    return VAGENT_OK;
  });
}

vagent_status vagent_server_wait(vagent_server* server) {
  if (!server) return fail(VAGENT_ERR_INVALID_ARGUMENT, "server is null");
  return guarded([&] {
    server->server->wait();
    return VAGENT_OK;
  });
}

void vagent_server_destroy(vagent_server* server) { delete server; }

}  // extern "C"
