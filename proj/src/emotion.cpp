#include "vagent/emotion.hpp"

#include "text_util.hpp"

namespace vagent {

std::string_view to_string(Emotion emotion) {
  switch (emotion) {
    case Emotion::Neutral: return "Neutral";
    case Emotion::Happy: return "Happy";
    case Emotion::Sad: return "Sad";
    case Emotion::Angry: return "Angry";
    case Emotion::Surprised: return "Surprised";
    case Emotion::Afraid: return "Afraid";
    case Emotion::Disgusted: return "Disgusted";
  }
  return "Neutral";
}

std::optional<Emotion> parse_emotion(std::string_view label) {
  for (Emotion e : kAllEmotions) {
    if (text::iequals(label, to_string(e))) return e;
  }
  return std::nullopt;
}

}  // namespace vagent
