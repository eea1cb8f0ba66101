#include <gtest/gtest.h>

#include <random>

#include "vagent/dialogue.hpp"
#include "vagent/error.hpp"

using namespace vagent;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

Transcript build(std::initializer_list<Turn> turns) {
  Transcript t("s");
  for (const auto& turn : turns) t = append_turn(t, turn);
  return t;
}

}  // namespace

TEST(Emotion, ParsesLabelsCaseInsensitively) {
  for (Emotion e : kAllEmotions) {
    std::string name(to_string(e));
    EXPECT_EQ(parse_emotion(name), e);
    std::string upper = name;
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    EXPECT_EQ(parse_emotion(upper), e);
  }
  EXPECT_FALSE(parse_emotion("Bored").has_value());
}

TEST(ReplyParsing, KnownHeader) {
  auto r = parse_emotion_tagged_reply("EMOTION: Happy\nGreat to see you!");
  EXPECT_EQ(r, (AgentReply{Emotion::Happy, "Great to see you!", false}));
}

TEST(ReplyParsing, MissingHeaderFallsBack) {
  auto r = parse_emotion_tagged_reply("Hi there.");
  EXPECT_EQ(r, (AgentReply{Emotion::Neutral, "Hi there.", true}));
}

TEST(ReplyParsing, HeaderIsCaseInsensitive) {
  auto r = parse_emotion_tagged_reply("emotion: ANGRY\nNo.");
  EXPECT_EQ(r, (AgentReply{Emotion::Angry, "No.", false}));
}

TEST(ReplyParsing, HeaderWithoutBodyIsEmptyReplyText) {
  EXPECT_EQ(code_of([] { parse_emotion_tagged_reply("EMOTION: Happy\n\n   "); }), ErrorCode::EmptyReplyText);
  EXPECT_EQ(code_of([] { parse_emotion_tagged_reply("   \n  "); }), ErrorCode::EmptyReplyText);
}

TEST(ReplyParsing, UnknownLabelDropsHeaderAndFallsBack) {
  auto r = parse_emotion_tagged_reply("EMOTION: Bored\nWhatever.");
  EXPECT_EQ(r, (AgentReply{Emotion::Neutral, "Whatever.", true}));
}

TEST(ReplyParsing, HeaderAfterBlankLinesAndMultilineBody) {
  auto r = parse_emotion_tagged_reply("\n  \nEMOTION: sad\nFirst line.\nSecond line.");
  EXPECT_EQ(r.emotion, Emotion::Sad);
  EXPECT_EQ(r.text, "First line.\nSecond line.");
  EXPECT_FALSE(r.parse_fallback);
}

TEST(ReplyParsing, RoundTripEveryLabel) {
  for (Emotion e : kAllEmotions) {
    auto r = parse_emotion_tagged_reply("EMOTION: " + std::string(to_string(e)) + "\nx");
    EXPECT_EQ(r.emotion, e);
    EXPECT_EQ(parse_emotion_tagged_reply(format_emotion_tagged_reply(e, "hello there")).emotion, e);
  }
}

// Fallback never fabricates: generated raw replies either carry a known
// header or come back Neutral with the fallback flag.
TEST(ReplyParsing, FallbackImpliesNeutralProperty) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> pieces = {"EMOTION:", "emotion: happy", "Happy", "hi", "\n", " ", "Sad",
                                           "EMOTION: Afraid", "x", ":", "EMOTION: Nope"};
  for (int i = 0; i < 5000; ++i) {
    std::string raw;
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int k = 0; k < n; ++k) raw += pieces[rng() % pieces.size()];
    try {
      auto r = parse_emotion_tagged_reply(raw);
      if (r.parse_fallback) {
        EXPECT_EQ(r.emotion, Emotion::Neutral) << raw;
      }
      EXPECT_FALSE(r.text.empty());
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EmptyReplyText) << raw;
    }
  }
}

TEST(Transcript, AppendAlternates) {
  Transcript t = build({Turn::user("hi", 0)});
  Transcript t2 = append_turn(t, Turn::agent("hello", Emotion::Happy, 500));
  EXPECT_EQ(t2.size(), 2u);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(code_of([&] { append_turn(t, Turn::user("again", 100)); }), ErrorCode::AlternationViolation);
}

TEST(Transcript, TimestampRegression) {
  Transcript t = build({Turn::user("hi", 0), Turn::agent("hello", Emotion::Neutral, 500)});
  EXPECT_EQ(code_of([&] { append_turn(t, Turn::user("late", 400)); }), ErrorCode::TimestampRegression);
}

TEST(Transcript, AgentFirstIsAllowed) {
  Transcript t = build({Turn::agent("Welcome.", Emotion::Happy, 0), Turn::user("thanks", 10)});
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.user_turn_count(), 1u);
}

TEST(LlmRequest, EmptyTranscriptGivesOneMessage) {
  auto req = build_llm_request("SYS", Transcript("s"), "Hello");
  EXPECT_EQ(req.system, "SYS");
  ASSERT_EQ(req.messages.size(), 1u);
  EXPECT_EQ(req.messages[0], (LlmMessage{Role::User, "Hello"}));
}

TEST(LlmRequest, PreservesOrder) {
  Transcript t = build({Turn::user("a", 0), Turn::agent("b", Emotion::Sad, 1), Turn::user("c", 2),
                        Turn::agent("d", Emotion::Happy, 3)});
  const Transcript before = t;
  auto req = build_llm_request("SYS", t, "e");
  ASSERT_EQ(req.messages.size(), 5u);
  EXPECT_EQ(req.messages[0].content, "a");
  EXPECT_EQ(req.messages[1].role, Role::Assistant);
  EXPECT_EQ(parse_emotion_tagged_reply(req.messages[1].content), (AgentReply{Emotion::Sad, "b", false}));
  EXPECT_EQ(req.messages[2].content, "c");
  EXPECT_EQ(parse_emotion_tagged_reply(req.messages[3].content).text, "d");
  EXPECT_EQ(req.messages[4].content, "e");
  EXPECT_EQ(t, before);
}

TEST(LlmRequest, WhitespaceUtteranceIsEmpty) {
  EXPECT_EQ(code_of([] { build_llm_request("SYS", Transcript("s"), " \t\n"); }), ErrorCode::EmptyUtterance);
}

TEST(LlmRequest, LengthIsTurnsPlusOneProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Transcript t("s");
    const int n = static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      t = append_turn(t, i % 2 == 0 ? Turn::user("u" + std::to_string(i), i)
                                    : Turn::agent("a" + std::to_string(i), kAllEmotions[rng() % 7], i));
    }
    auto req = build_llm_request("S", t, "next");
    ASSERT_EQ(req.messages.size(), t.size() + 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_NE(req.messages[i].content.find(t.turns()[i].text), std::string::npos);
    }
  }
}
