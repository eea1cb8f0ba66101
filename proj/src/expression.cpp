#include "vagent/expression.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace vagent {

std::int64_t BlendshapeClip::duration_ms() const {
  return static_cast<std::int64_t>(frames.size()) * 1000 / fps;
}

std::string ClipIssue::describe() const {
  switch (kind) {
    case ClipIssueKind::ParseError: return "ParseError(" + location + "): " + detail;
    case ClipIssueKind::MissingEmotion:
      return "MissingEmotion(" + std::string(to_string(emotion)) + ")";
    case ClipIssueKind::ChannelMismatch: return "ChannelMismatch(" + clip_id + ")";
    case ClipIssueKind::WeightOutOfRange:
      return "WeightOutOfRange(" + clip_id + ", frame " + std::to_string(frame) + ", channel " +
             std::to_string(channel) + ")";
  }
  return "Unknown";
}

namespace {

ErrorCode code_for(ClipIssueKind kind) {
  switch (kind) {
    case ClipIssueKind::ParseError: return ErrorCode::ParseError;
    case ClipIssueKind::MissingEmotion: return ErrorCode::MissingEmotion;
    case ClipIssueKind::ChannelMismatch: return ErrorCode::ChannelMismatch;
    case ClipIssueKind::WeightOutOfRange: return ErrorCode::WeightOutOfRange;
  }
  return ErrorCode::ParseError;
}

std::string summarize(const std::vector<ClipIssue>& issues) {
  std::string out = "invalid clip library";
  for (const auto& i : issues) out += "\n  " + i.describe();
  return out;
}

// 1-based line and column of a byte offset.
std::string line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

class IssueCollector {
 public:
  void parse(std::string location, std::string detail) {
    ClipIssue i;
    i.kind = ClipIssueKind::ParseError;
    i.location = std::move(location);
    i.detail = std::move(detail);
    issues.push_back(std::move(i));
  }
  std::vector<ClipIssue> issues;
};

}  // namespace

ClipLibraryError::ClipLibraryError(std::vector<ClipIssue> issues)
    : Error(issues.empty() ? ErrorCode::ParseError : code_for(issues.front().kind), summarize(issues)),
      issues_(std::move(issues)) {}

std::size_t ClipLibrary::clip_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [emotion, clips] : clips_) n += clips.size();
  return n;
}

std::span<const BlendshapeClip> ClipLibrary::clips_for(Emotion emotion) const {
  auto it = clips_.find(emotion);
  if (it == clips_.end()) return {};
  return it->second;
}

ClipLibrary ClipLibrary::from_json_text(std::string_view json_text, const std::string& source) {
  using nlohmann::json;
  const std::string prefix = source.empty() ? std::string{} : source + ": ";
  IssueCollector out;

  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    out.parse(prefix + line_column(json_text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    throw ClipLibraryError(std::move(out.issues));
  }

  ClipLibrary lib;
  if (!doc.is_object()) {
    out.parse(prefix + "/", "library must be a JSON object");
    throw ClipLibraryError(std::move(out.issues));
  }

  if (!doc.contains("fps") || !doc["fps"].is_number_integer() || doc["fps"].get<long long>() <= 0) {
    out.parse(prefix + "/fps", "fps must be a positive integer");
  } else {
    lib.fps_ = doc["fps"].get<int>();
  }

  if (!doc.contains("channels") || !doc["channels"].is_array() || doc["channels"].empty()) {
    out.parse(prefix + "/channels", "channels must be a non-empty array of names");
  } else {
    std::set<std::string> seen;
    for (std::size_t c = 0; c < doc["channels"].size(); ++c) {
      const auto& name = doc["channels"][c];
      if (!name.is_string()) {
        out.parse(prefix + "/channels/" + std::to_string(c), "channel name must be a string");
        continue;
      }
      if (!seen.insert(name.get<std::string>()).second) {
        out.parse(prefix + "/channels/" + std::to_string(c), "duplicate channel name");
      }
      lib.channels_.push_back(name.get<std::string>());
    }
  }

  if (!doc.contains("clips") || !doc["clips"].is_array()) {
    out.parse(prefix + "/clips", "clips must be an array");
    throw ClipLibraryError(std::move(out.issues));
  }

  std::set<std::string> clip_ids;
  const auto& clips = doc["clips"];
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const std::string where = prefix + "/clips/" + std::to_string(i);
    const auto& c = clips[i];
    if (!c.is_object()) {
      out.parse(where, "clip must be an object");
      continue;
    }
    BlendshapeClip clip;
    clip.fps = lib.fps_;
    clip.channels = lib.channels_;
    bool ok = true;

    if (!c.contains("clip_id") || !c["clip_id"].is_string() || c["clip_id"].get<std::string>().empty()) {
      out.parse(where + "/clip_id", "clip_id must be a non-empty string");
      ok = false;
    } else {
      clip.clip_id = c["clip_id"].get<std::string>();
      if (!clip_ids.insert(clip.clip_id).second) {
        out.parse(where + "/clip_id", "duplicate clip_id " + clip.clip_id);
        ok = false;
      }
    }

    std::optional<Emotion> emotion;
    if (c.contains("emotion") && c["emotion"].is_string()) {
      emotion = parse_emotion(c["emotion"].get<std::string>());
    }
    if (!emotion) {
      out.parse(where + "/emotion", "emotion must be one of the seven labels");
      ok = false;
    } else {
      clip.emotion = *emotion;
    }

    if (c.contains("fps") && (!c["fps"].is_number_integer() || c["fps"].get<long long>() != lib.fps_)) {
      out.parse(where + "/fps", "clip fps differs from library fps");
      ok = false;
    }

    if (!c.contains("frames") || !c["frames"].is_array() || c["frames"].size() < 2) {
      out.parse(where + "/frames", "frames must be an array of at least two frames");
      ok = false;
    } else {
      bool mismatch_reported = false;
      const auto& frames = c["frames"];
      for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& frame = frames[f];
        if (!frame.is_array()) {
          out.parse(where + "/frames/" + std::to_string(f), "frame must be an array of weights");
          ok = false;
          continue;
        }
        if (frame.size() != lib.channels_.size()) {
          if (!mismatch_reported) {
            ClipIssue issue;
            issue.kind = ClipIssueKind::ChannelMismatch;
            issue.clip_id = clip.clip_id;
            out.issues.push_back(issue);
            mismatch_reported = true;
          }
          ok = false;
        }
        BlendshapeFrame bf;
        bf.weights.reserve(frame.size());
        for (std::size_t ch = 0; ch < frame.size(); ++ch) {
          if (!frame[ch].is_number()) {
            out.parse(where + "/frames/" + std::to_string(f) + "/" + std::to_string(ch),
                      "weight must be a number");
            ok = false;
            continue;
          }
          const double w = frame[ch].get<double>();
          if (!(w >= 0.0 && w <= 1.0)) {
            ClipIssue issue;
            issue.kind = ClipIssueKind::WeightOutOfRange;
            issue.clip_id = clip.clip_id;
            issue.frame = f;
            issue.channel = ch;
            out.issues.push_back(issue);
            ok = false;
          }
          bf.weights.push_back(w);
        }
        clip.frames.push_back(std::move(bf));
      }
    }

    if (ok) lib.clips_[clip.emotion].push_back(std::move(clip));
  }

  // Only meaningful once the clips themselves parsed.
  if (out.issues.empty()) {
    for (Emotion e : kAllEmotions) {
      if (!lib.clips_.contains(e)) {
        ClipIssue issue;
        issue.kind = ClipIssueKind::MissingEmotion;
        issue.emotion = e;
        out.issues.push_back(issue);
      }
    }
  }

  if (!out.issues.empty()) throw ClipLibraryError(std::move(out.issues));
  return lib;
}

nlohmann::json ClipLibrary::to_json() const {
  nlohmann::json clips = nlohmann::json::array();
  for (const auto& [emotion, list] : clips_) {
    for (const auto& clip : list) {
      nlohmann::json frames = nlohmann::json::array();
      for (const auto& f : clip.frames) frames.push_back(f.weights);
      clips.push_back({{"clip_id", clip.clip_id},
                       {"emotion", to_string(clip.emotion)},
                       {"frames", std::move(frames)}});
    }
  }
  return {{"fps", fps_}, {"channels", channels_}, {"clips", std::move(clips)}};
}

ClipLibrary load_clip_library(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ClipIssue issue;
    issue.kind = ClipIssueKind::ParseError;
    issue.location = path.string();
    issue.detail = "cannot open file";
    throw ClipLibraryError({issue});
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ClipLibrary::from_json_text(buf.str(), path.string());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

__extension__ typedef unsigned __int128 Uint128;

}  // namespace

std::size_t choose_index(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "no candidates to choose from");
  // Multiply-shift maps the 64-bit hash onto [0, count).
  const Uint128 product = static_cast<Uint128>(splitmix64(seed)) * static_cast<Uint128>(count);
  return static_cast<std::size_t>(product >> 64);
}

const BlendshapeClip& select_clip(const ClipLibrary& library, Emotion emotion, std::uint64_t seed) {
  auto candidates = library.clips_for(emotion);
  if (candidates.empty()) {
    throw Error(ErrorCode::MissingEmotion,
                "clip library has no clip for " + std::string(to_string(emotion)));
  }
  return candidates[choose_index(candidates.size(), seed)];
}

std::size_t track_frame_count(std::int64_t duration_ms, int fps) {
  const std::int64_t scaled = duration_ms * fps;
  return static_cast<std::size_t>((scaled + 999) / 1000);
}

std::size_t seam_frame_count(const BlendshapeClip& clip) {
  const auto by_time = static_cast<std::size_t>(clip.fps / 5);  // 200 ms
  return std::min(by_time, clip.frames.size() / 2);
}

AnimationTrack build_animation_track(const BlendshapeClip& clip, std::int64_t audio_duration_ms) {
  if (audio_duration_ms <= 0) {
    throw Error(ErrorCode::InvalidArgument, "audio duration must be positive");
  }
  if (clip.frames.size() < 2 || clip.fps <= 0) {
    throw Error(ErrorCode::InvalidArgument, "clip " + clip.clip_id + " is not a valid clip");
  }

  AnimationTrack track;
  track.fps = clip.fps;
  track.duration_ms = audio_duration_ms;
  const std::size_t total = track_frame_count(audio_duration_ms, clip.fps);
  const std::size_t n = clip.frames.size();
  track.frames.reserve(total);

  if (total <= n) {
    track.frames.assign(clip.frames.begin(), clip.frames.begin() + static_cast<std::ptrdiff_t>(total));
    return track;
  }

  const std::size_t seam = seam_frame_count(clip);
  const std::size_t period = n - seam;
  const std::size_t first_seam = n - seam;

  for (std::size_t j = 0; j < total; ++j) {
    if (j < first_seam) {
      track.frames.push_back(clip.frames[j]);
      continue;
    }
    const std::size_t r = (j - first_seam) % period;
    if (r >= seam) {
      track.frames.push_back(clip.frames[r]);
      continue;
    }
    const auto& tail = clip.frames[n - seam + r].weights;
    const auto& head = clip.frames[r].weights;
    const double alpha = static_cast<double>(r + 1) / static_cast<double>(seam + 1);
    BlendshapeFrame blended;
    blended.weights.resize(tail.size());
    for (std::size_t ch = 0; ch < tail.size(); ++ch) {
      const double lo = std::min(tail[ch], head[ch]);
      const double hi = std::max(tail[ch], head[ch]);
      blended.weights[ch] = std::clamp((1.0 - alpha) * tail[ch] + alpha * head[ch], lo, hi);
    }
    track.frames.push_back(std::move(blended));
  }
  return track;
}

std::vector<std::string> arkit_channel_names() {
  return {"eyeBlinkLeft",      "eyeLookDownLeft",    "eyeLookInLeft",       "eyeLookOutLeft",
          "eyeLookUpLeft",     "eyeSquintLeft",      "eyeWideLeft",         "eyeBlinkRight",
          "eyeLookDownRight",  "eyeLookInRight",     "eyeLookOutRight",     "eyeLookUpRight",
          "eyeSquintRight",    "eyeWideRight",       "jawForward",          "jawLeft",
          "jawRight",          "jawOpen",            "mouthClose",          "mouthFunnel",
          "mouthPucker",       "mouthLeft",          "mouthRight",          "mouthSmileLeft",
          "mouthSmileRight",   "mouthFrownLeft",     "mouthFrownRight",     "mouthDimpleLeft",
          "mouthDimpleRight",  "mouthStretchLeft",   "mouthStretchRight",   "mouthRollLower",
          "mouthRollUpper",    "mouthShrugLower",    "mouthShrugUpper",     "mouthPressLeft",
          "mouthPressRight",   "mouthLowerDownLeft", "mouthLowerDownRight", "mouthUpperUpLeft",
          "mouthUpperUpRight", "browDownLeft",       "browDownRight",       "browInnerUp",
          "browOuterUpLeft",   "browOuterUpRight",   "cheekPuff",           "cheekSquintLeft",
          "cheekSquintRight",  "noseSneerLeft",      "noseSneerRight",      "tongueOut"};
}

}  // namespace vagent
