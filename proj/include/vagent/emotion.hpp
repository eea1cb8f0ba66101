#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace vagent {

// The agent's emotional state for one reply. Closed set; drives both the TTS
// request and the facial clip selection.
enum class Emotion : std::uint8_t {
  Neutral,
  Happy,
  Sad,
  Angry,
  Surprised,
  Afraid,
  Disgusted,
};

inline constexpr std::array<Emotion, 7> kAllEmotions{
    Emotion::Neutral,   Emotion::Happy,  Emotion::Sad,      Emotion::Angry,
    Emotion::Surprised, Emotion::Afraid, Emotion::Disgusted,
};

std::string_view to_string(Emotion emotion);

// Case-insensitive label lookup. Returns nullopt for anything outside the set.
std::optional<Emotion> parse_emotion(std::string_view label);

}  // namespace vagent
