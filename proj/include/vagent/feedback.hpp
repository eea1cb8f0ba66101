#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vagent/dialogue.hpp"
#include "vagent/providers.hpp"

namespace vagent {

// A claim about the user, tied to the user turn that shows it. quote is that
// turn's text, captured when the report is built.
struct Evidence {
  std::string claim;
  std::size_t turn_index = 0;
  std::string quote;
  bool operator==(const Evidence&) const = default;
};

struct FeedbackReport {
  std::string goal;
  std::vector<Evidence> strengths;
  std::vector<Evidence> weaknesses;
  std::vector<std::string> actions;
  bool operator==(const FeedbackReport&) const = default;
};

// The analysis request: fixed instructions, the goal, and the transcript with
// numbered turns. `retry` appends a fixed format reminder.
LlmRequest build_feedback_request(const Transcript& transcript, std::string_view goal,
                                  bool retry = false);

// Reads STRENGTH <idx>: / WEAKNESS <idx>: / ACTION: lines. Evidence whose index
// is not a user turn of `transcript` is dropped. Sections may come back empty.
FeedbackReport parse_feedback_reply(std::string_view raw, const Transcript& transcript,
                                    std::string_view goal);

// Throws Error(EmptyTranscript) when there is no user turn and
// Error(UnparseableFeedback) when a section is still empty after one retry.
// Provider failures propagate unchanged.
FeedbackReport generate_feedback(const std::shared_ptr<LlmProvider>& provider,
                                 const Transcript& transcript, std::string_view goal,
                                 Millis budget);

// Goal / Strengths / Weaknesses / Next steps, quoting the cited utterances.
std::string render_feedback_text(const FeedbackReport& report);

void to_json(nlohmann::json& j, const FeedbackReport& report);
void from_json(const nlohmann::json& j, FeedbackReport& report);

}  // namespace vagent
