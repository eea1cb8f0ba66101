#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "vagent/expression.hpp"

using namespace vagent;

namespace {

std::vector<BlendshapeClip> one_per_emotion(std::mt19937_64& rng, std::size_t channels = 3) {
  std::vector<BlendshapeClip> clips;
  for (Emotion e : kAllEmotions) clips.push_back(vtest::random_clip(rng, e, 30, channels, 8, std::string(to_string(e))));
  return clips;
}

std::vector<ClipIssue> issues_of(const std::string& text) {
  try {
    ClipLibrary::from_json_text(text, "lib.json");
  } catch (const ClipLibraryError& e) {
    return e.issues();
  }
  ADD_FAILURE() << "library unexpectedly valid";
  return {};
}

// Independent construction: tile k covers frames [k*P, k*P + n) with
// P = n - W; where two tiles overlap the earlier one fades out linearly.
std::vector<std::vector<double>> reference_track(const BlendshapeClip& clip, std::int64_t duration_ms) {
  const std::size_t total = vtest::expected_frames(duration_ms, clip.fps);
  const std::size_t n = clip.frames.size();
  std::vector<std::vector<double>> out;
  if (total <= n) {
    for (std::size_t j = 0; j < total; ++j) out.push_back(clip.frames[j].weights);
    return out;
  }
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(clip.fps) * 200 / 1000, n / 2);
  const std::size_t p = n - w;
  for (std::size_t j = 0; j < total; ++j) {
    std::vector<std::size_t> covering;
    for (std::size_t k = 0; k * p <= j; ++k) {
      if (j < k * p + n) covering.push_back(k);
    }
    if (covering.size() == 1) {
      out.push_back(clip.frames[j - covering[0] * p].weights);
      continue;
    }
    const std::size_t late = covering.back();
    const std::size_t into = j - late * p;
    const double alpha = static_cast<double>(into + 1) / static_cast<double>(w + 1);
    const auto& tail = clip.frames[j - (late - 1) * p].weights;
    const auto& head = clip.frames[into].weights;
    std::vector<double> blended(tail.size());
    for (std::size_t c = 0; c < tail.size(); ++c) blended[c] = (1 - alpha) * tail[c] + alpha * head[c];
    out.push_back(blended);
  }
  return out;
}

}  // namespace

TEST(ClipLibrary, SampleLibraryIsValid) {
  auto lib = load_clip_library(vtest::asset("assets/clips/sample_library.json"));
  EXPECT_EQ(lib.emotion_count(), 7u);
  EXPECT_EQ(lib.clip_count(), 7u);
  EXPECT_EQ(lib.fps(), 30);
  EXPECT_EQ(lib.channels(), arkit_channel_names());
  for (Emotion e : kAllEmotions) EXPECT_FALSE(lib.clips_for(e).empty());
}

TEST(ClipLibrary, SevenClipsSevenKeys) {
  std::mt19937_64 rng(1);
  auto clips = one_per_emotion(rng);
  auto lib = ClipLibrary::from_json_text(vtest::library_json(clips, 30, clips[0].channels));
  EXPECT_EQ(lib.emotion_count(), 7u);
}

TEST(ClipLibrary, MissingDisgusted) {
  std::mt19937_64 rng(1);
  auto clips = one_per_emotion(rng);
  clips.pop_back();
  auto issues = issues_of(vtest::library_json(clips, 30, clips[0].channels));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, ClipIssueKind::MissingEmotion);
  EXPECT_EQ(issues[0].emotion, Emotion::Disgusted);
}

TEST(ClipLibrary, WeightOutOfRange) {
  std::mt19937_64 rng(1);
  auto clips = one_per_emotion(rng);
  clips[2].frames[4].weights[1] = 1.2;
  auto issues = issues_of(vtest::library_json(clips, 30, clips[0].channels));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, ClipIssueKind::WeightOutOfRange);
  EXPECT_EQ(issues[0].clip_id, clips[2].clip_id);
  EXPECT_EQ(issues[0].frame, 4u);
  EXPECT_EQ(issues[0].channel, 1u);
}

TEST(ClipLibrary, ChannelMismatch) {
  std::mt19937_64 rng(1);
  auto clips = one_per_emotion(rng);
  clips[3].frames[0].weights.push_back(0.5);
  auto issues = issues_of(vtest::library_json(clips, 30, clips[0].channels));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, ClipIssueKind::ChannelMismatch);
  EXPECT_EQ(issues[0].clip_id, clips[3].clip_id);
}

TEST(ClipLibrary, ParseErrorHasLocation) {
  auto issues = issues_of("{\n  \"fps\": 30,\n  \"channels\": [\"a\",\n}");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].kind, ClipIssueKind::ParseError);
  EXPECT_NE(issues[0].location.find("line 4"), std::string::npos) << issues[0].location;
}

TEST(ClipLibrary, StructuralErrorsUseJsonPointer) {
  auto issues = issues_of(R"({"fps":30,"channels":["a"],"clips":[{"clip_id":"x","emotion":"Happy","frames":"no"}]})");
  ASSERT_FALSE(issues.empty());
  EXPECT_EQ(issues[0].kind, ClipIssueKind::ParseError);
  EXPECT_NE(issues[0].location.find("/clips/0"), std::string::npos) << issues[0].location;
}

TEST(ClipLibrary, MissingFileIsParseError) {
  try {
    load_clip_library("/nonexistent/lib.json");
    FAIL();
  } catch (const ClipLibraryError& e) {
    EXPECT_EQ(e.issues().at(0).kind, ClipIssueKind::ParseError);
  }
}

TEST(ClipSelection, SingleCandidate) {
  auto lib = vtest::tiny_library();
  for (Emotion e : kAllEmotions) {
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
      const auto& clip = select_clip(lib, e, seed);
      EXPECT_EQ(clip.emotion, e);
      EXPECT_EQ(&clip, &lib.clips_for(e)[0]);
    }
  }
}

TEST(ClipSelection, DeterministicForSeed) {
  auto lib = vtest::tiny_library(2, Emotion::Sad);
  ASSERT_EQ(lib.clips_for(Emotion::Sad).size(), 3u);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_EQ(select_clip(lib, Emotion::Sad, seed).clip_id, select_clip(lib, Emotion::Sad, seed).clip_id);
  }
}

TEST(ClipSelection, UniformOverTwoCandidates) {
  auto lib = vtest::tiny_library(1, Emotion::Happy);
  const auto candidates = lib.clips_for(Emotion::Happy);
  ASSERT_EQ(candidates.size(), 2u);
  int first = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    if (select_clip(lib, Emotion::Happy, seed).clip_id == candidates[0].clip_id) ++first;
  }
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(ClipSelection, UniformChiSquareOverFive) {
  std::array<int, 5> counts{};
  for (std::uint64_t seed = 0; seed < 50000; ++seed) ++counts[choose_index(5, seed)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  EXPECT_LT(chi2, 18.47);  // p = 0.001, 4 degrees of freedom
}

TEST(Track, FrameCountArithmetic) {
  EXPECT_EQ(track_frame_count(2000, 30), 60u);
  EXPECT_EQ(track_frame_count(60, 30), 2u);
  EXPECT_EQ(track_frame_count(1, 30), 1u);
  EXPECT_EQ(track_frame_count(1000, 24), 24u);
  EXPECT_EQ(track_frame_count(1001, 24), 25u);
}

TEST(Track, LoopingThirtyFrameClipToTwoSeconds) {
  std::mt19937_64 rng(5);
  auto clip = vtest::random_clip(rng, Emotion::Happy, 30, 4, 30);
  auto track = build_animation_track(clip, 2000);
  EXPECT_EQ(track.frames.size(), 60u);
  EXPECT_EQ(track.duration_ms, 2000);
  EXPECT_EQ(seam_frame_count(clip), 6u);
}

TEST(Track, LongClipIsPrefix) {
  std::mt19937_64 rng(5);
  auto clip = vtest::random_clip(rng, Emotion::Sad, 30, 4, 90);
  auto track = build_animation_track(clip, 2000);
  ASSERT_EQ(track.frames.size(), 60u);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(track.frames[i], clip.frames[i]);
}

TEST(Track, RejectsNonPositiveDuration) {
  std::mt19937_64 rng(5);
  auto clip = vtest::random_clip(rng, Emotion::Sad, 30, 4, 10);
  EXPECT_THROW(build_animation_track(clip, 0), Error);
}

// Random clips: matches the tile/overlap reference, and seam frames stay
// inside the per-channel envelope of the two frames they blend.
TEST(Track, MatchesReferenceAndEnvelopeProperty) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int fps = std::array{12, 24, 25, 30, 60}[rng() % 5];
    const std::size_t frames = 2 + rng() % 80;
    const std::size_t channels = 1 + rng() % 8;
    auto clip = vtest::random_clip(rng, Emotion::Neutral, fps, channels, frames);
    const std::int64_t duration = 1 + static_cast<std::int64_t>(rng() % 20000);
    auto track = build_animation_track(clip, duration);
    auto want = reference_track(clip, duration);
    ASSERT_EQ(track.frames.size(), want.size());
    for (std::size_t j = 0; j < want.size(); ++j) {
      for (std::size_t c = 0; c < channels; ++c) {
        ASSERT_NEAR(track.frames[j].weights[c], want[j][c], 1e-12) << "trial " << trial << " frame " << j;
        ASSERT_GE(track.frames[j].weights[c], 0.0);
        ASSERT_LE(track.frames[j].weights[c], 1.0);
      }
    }
  }
}
