// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <string>

#include "vagent/vagent.h"

namespace {

std::string path(const char* relative) { return std::string(VAGENT_SOURCE_DIR) + "/" + relative; }

std::string take(char* s) {
  std::string out = s ? s : "";
  vagent_string_free(s);
  return out;
}

}  // namespace

TEST(CApi, Version) { EXPECT_STREQ(vagent_version(), "0.1.0"); }

TEST(CApi, ValidateBundledClips) {
  char* report = nullptr;
  ASSERT_EQ(vagent_validate_clips(path("assets/clips/sample_library.json").c_str(), &report), VAGENT_OK);
  EXPECT_EQ(take(report), "OK, 7 emotions, 7 clips\n");
}

TEST(CApi, ValidateMissingEmotion) {
  char* report = nullptr;
  ASSERT_EQ(vagent_validate_clips(path("tests/data/missing_disgusted.json").c_str(), &report),
            VAGENT_ERR_CLIP_LIBRARY);
  EXPECT_EQ(take(report), "MissingEmotion(Disgusted)\n");
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(vagent_validate_clips(nullptr, nullptr), VAGENT_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(vagent_last_error()), "");
  EXPECT_EQ(vagent_server_start(nullptr), VAGENT_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(vagent_server_port(nullptr), 0);
}

TEST(CApi, ReplayIsDeterministic) {
  char* a = nullptr;
  char* b = nullptr;
  const auto script = path("assets/scripts/interview_practice.json");
  const auto config = path("config/server.json");
  ASSERT_EQ(vagent_replay(script.c_str(), config.c_str(), 11, &a), VAGENT_OK);
  ASSERT_EQ(vagent_replay(script.c_str(), config.c_str(), 11, &b), VAGENT_OK);
  const std::string first = take(a);
  EXPECT_EQ(first, take(b));
  EXPECT_EQ(first.rfind("session: replay-11\n", 0), 0u);
}

TEST(CApi, ReplayBadScript) {
  char* out = nullptr;
  EXPECT_EQ(vagent_replay(path("tests/data/empty_script.json").c_str(), path("config/server.json").c_str(), 1, &out),
            VAGENT_ERR_SCRIPT_PARSE);
  EXPECT_EQ(out, nullptr);
  EXPECT_EQ(std::string(vagent_last_error()).rfind("ScriptParseError: ", 0), 0u);
}

TEST(CApi, ServerMissingClipLibrary) {
  vagent_server* server = nullptr;
  EXPECT_EQ(vagent_server_create(path("tests/data/missing_library_config.json").c_str(), &server), VAGENT_ERR_CONFIG);
  EXPECT_EQ(server, nullptr);
  EXPECT_NE(std::string(vagent_last_error()).find("no_such_library.json"), std::string::npos);
}

TEST(CApi, ServerLifecycle) {
  vagent_server* server = nullptr;
  ASSERT_EQ(vagent_server_create(path("tests/data/ephemeral_port_config.json").c_str(), &server), VAGENT_OK);
  ASSERT_EQ(vagent_server_start(server), VAGENT_OK);
  EXPECT_NE(vagent_server_port(server), 0);
  EXPECT_EQ(vagent_server_shutdown(server), VAGENT_OK);
  EXPECT_EQ(vagent_server_wait(server), VAGENT_OK);
  vagent_server_destroy(server);
}
