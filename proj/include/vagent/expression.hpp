#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vagent/emotion.hpp"
#include "vagent/error.hpp"

namespace vagent {

// One pose: a weight in [0,1] per blendshape channel.
struct BlendshapeFrame {
  std::vector<double> weights;
  bool operator==(const BlendshapeFrame&) const = default;
};

struct BlendshapeClip {
  std::string clip_id;
  Emotion emotion = Emotion::Neutral;
  int fps = 30;
  std::vector<std::string> channels;
  std::vector<BlendshapeFrame> frames;  // at least two

  // frames / fps, in milliseconds (rounded down).
  std::int64_t duration_ms() const;
};

enum class ClipIssueKind { ParseError, MissingEmotion, ChannelMismatch, WeightOutOfRange };

struct ClipIssue {
  ClipIssueKind kind = ClipIssueKind::ParseError;
  std::string location;  // ParseError: "line L, column C" or a JSON pointer
  std::string detail;    // ParseError
  Emotion emotion = Emotion::Neutral;  // MissingEmotion
  std::string clip_id;                 // ChannelMismatch, WeightOutOfRange
  std::size_t frame = 0;               // WeightOutOfRange
  std::size_t channel = 0;             // WeightOutOfRange

  std::string describe() const;
};

class ClipLibraryError : public Error {
 public:
  explicit ClipLibraryError(std::vector<ClipIssue> issues);
  const std::vector<ClipIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ClipIssue> issues_;
};

// Emotion-keyed blendshape clips sharing one channel list and frame rate.
// Immutable after loading; safe to share across sessions.
class ClipLibrary {
 public:
  // Validates the whole document and throws ClipLibraryError listing every
  // problem found. `source` prefixes parse-error locations.
  static ClipLibrary from_json_text(std::string_view json_text, const std::string& source = {});

  int fps() const noexcept { return fps_; }
  const std::vector<std::string>& channels() const noexcept { return channels_; }
  std::span<const BlendshapeClip> clips_for(Emotion emotion) const;
  std::size_t emotion_count() const noexcept { return clips_.size(); }
  std::size_t clip_count() const noexcept;

  nlohmann::json to_json() const;

 private:
  ClipLibrary() = default;
  int fps_ = 30;
  std::vector<std::string> channels_;
  std::map<Emotion, std::vector<BlendshapeClip>> clips_;
};

// All-or-nothing load of a clip library file.
ClipLibrary load_clip_library(const std::filesystem::path& path);

// Uniform choice among `count` candidates, fixed by `seed`.
std::size_t choose_index(std::size_t count, std::uint64_t seed);

// A clip for `emotion`; with several candidates the choice is uniform and
// deterministic in `seed`.
const BlendshapeClip& select_clip(const ClipLibrary& library, Emotion emotion, std::uint64_t seed);

struct AnimationTrack {
  int fps = 30;
  std::vector<BlendshapeFrame> frames;
  std::int64_t duration_ms = 0;
};

// ceil(duration_ms / 1000 * fps)
std::size_t track_frame_count(std::int64_t duration_ms, int fps);

// Crossfade length at a loop seam: min(200 ms, half the clip), in frames.
std::size_t seam_frame_count(const BlendshapeClip& clip);

// Expands `clip` to exactly cover `audio_duration_ms`. A clip at least as long
// as the audio is truncated. Otherwise the clip is looped: each repeat
// overlaps the previous one by seam_frame_count frames, which are crossfaded
// linearly from the clip's tail into its head, and the last repeat is cut at
// the target duration.
AnimationTrack build_animation_track(const BlendshapeClip& clip, std::int64_t audio_duration_ms);

// The 52 ARKit face-tracking blendshape names, in their conventional order.
std::vector<std::string> arkit_channel_names();

}  // namespace vagent
