// vagent: run the server, check a clip library, or replay a script.
#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>

#include <pthread.h>

#include "CLI11.hpp"
#include "vagent/vagent.h"

namespace {

int report_failure(vagent_status status) {
  std::cerr << "vagent: " << vagent_last_error() << "\n";
  return static_cast<int>(status);
}

int cmd_serve(const std::string& config_path) {
  // Block the stop signals before any library thread exists so they all
  // inherit the mask and only sigwait below sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  vagent_server* server = nullptr;
  if (vagent_status st = vagent_server_create(config_path.c_str(), &server); st != VAGENT_OK) {
    return report_failure(st);
  }
  if (vagent_status st = vagent_server_start(server); st != VAGENT_OK) {
    vagent_server_destroy(server);
    return report_failure(st);
  }
  std::cout << "vagent listening on port " << vagent_server_port(server) << std::endl;

  int sig = 0;
  sigwait(&stop_signals, &sig);
  std::cout << "vagent: received signal " << sig << ", shutting down" << std::endl;
  vagent_server_shutdown(server);
  vagent_server_wait(server);
  vagent_server_destroy(server);
  return 0;
}

int cmd_validate_clips(const std::string& path) {
  char* report = nullptr;
  const vagent_status st = vagent_validate_clips(path.c_str(), &report);
  if (report) {
    (st == VAGENT_OK ? std::cout : std::cerr) << report;
    vagent_string_free(report);
  }
  if (st != VAGENT_OK && st != VAGENT_ERR_CLIP_LIBRARY) return report_failure(st);
  return st == VAGENT_OK ? 0 : 1;
}

int cmd_replay(const std::string& script, const std::string& config, std::uint64_t seed) {
  char* transcript = nullptr;
  const vagent_status st = vagent_replay(script.c_str(), config.c_str(), seed, &transcript);
  if (st != VAGENT_OK) return report_failure(st);
  std::cout << transcript;
  vagent_string_free(transcript);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affective virtual-agent conversation server"};
  app.set_version_flag("--version", std::string(vagent_version()));
  app.require_subcommand(1);

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the WebSocket server until SIGINT/SIGTERM");
  serve->add_option("--config", config_path, "Server config JSON")->required()->check(CLI::ExistingFile);

  std::string clip_path;
  auto* validate = app.add_subcommand("validate-clips", "Check a blendshape clip library");
  validate->add_option("path", clip_path, "Clip library JSON")->required();

  std::string script_path;
  std::string replay_config;
  std::uint64_t seed = 1;
  auto* replay = app.add_subcommand("replay", "Replay a scripted conversation with mock providers");
  replay->add_option("script", script_path, "Replay script JSON")->required();
  replay->add_option("--config", replay_config, "Server config JSON")->required();
  replay->add_option("--seed", seed, "Seed for clip selection and the session id");

  CLI11_PARSE(app, argc, argv);

  if (*serve) return cmd_serve(config_path);
  if (*validate) return cmd_validate_clips(clip_path);
  return cmd_replay(script_path, replay_config, seed);
}
