#include "vagent/feedback.hpp"

#include <charconv>
#include <sstream>

#include "text_util.hpp"

namespace vagent {

namespace {

constexpr std::string_view kInstructions =
    "You are a communication coach. Review the practice conversation below between a USER and a "
    "virtual AGENT, and judge the USER's communication skills against the USER's goal.\n"
    "Identify what the USER did well and what the USER should improve, citing the number of the "
    "USER turn that shows each point, then give concrete next steps.\n"
    "Answer with lines of exactly these forms and nothing else:\n"
    "STRENGTH <turn number>: <what the user did well>\n"
    "WEAKNESS <turn number>: <what the user should improve>\n"
    "ACTION: <one imperative suggestion>\n"
    "Give at least one line of each kind. Cite only turns marked USER.";

constexpr std::string_view kRetryReminder =
    "Your previous answer could not be used. Follow the line format exactly and cite only the "
    "numbers of turns marked USER.";

bool is_user_turn(const Transcript& transcript, std::size_t index) {
  return index < transcript.size() && transcript.turns()[index].speaker == Speaker::User;
}

// Parses "<idx>: <claim>" following a keyword.
std::optional<std::pair<std::size_t, std::string_view>> indexed_claim(std::string_view rest) {
  rest = text::trim(rest);
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), index);
  if (ec != std::errc{} || ptr == rest.data()) return std::nullopt;
  rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
  rest = text::trim(rest);
  if (rest.empty() || rest.front() != ':') return std::nullopt;
  auto claim = text::trim(rest.substr(1));
  if (claim.empty()) return std::nullopt;
  return std::pair{index, claim};
}

}  // namespace

LlmRequest build_feedback_request(const Transcript& transcript, std::string_view goal,
                                  bool retry) {
  std::ostringstream body;
  body << "Goal: " << text::trim(goal) << "\n\nTranscript:\n";
  const auto turns = transcript.turns();
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Turn& t = turns[i];
    body << '[' << i << "] ";
    if (t.speaker == Speaker::User) {
      body << "USER: ";
    } else {
      body << "AGENT (" << to_string(*t.emotion) << "): ";
    }
    body << t.text << '\n';
  }
  if (retry) body << '\n' << kRetryReminder << '\n';

  LlmRequest request;
  request.system = std::string(kInstructions);
  request.messages.push_back({Role::User, body.str()});
  request.purpose = RequestPurpose::Feedback;
  return request;
}

FeedbackReport parse_feedback_reply(std::string_view raw, const Transcript& transcript,
                                    std::string_view goal) {
  FeedbackReport report;
  report.goal = std::string(text::trim(goal));
  for (auto line : text::split_lines(raw)) {
    line = text::trim(line);
    if (line.starts_with("- ") || line.starts_with("* ")) line = text::trim(line.substr(2));

    auto evidence_into = [&](std::string_view keyword, std::vector<Evidence>& section) {
      if (!text::istarts_with(line, keyword)) return false;
      if (auto parsed = indexed_claim(line.substr(keyword.size()))) {
        auto [index, claim] = *parsed;
        if (is_user_turn(transcript, index)) {
          section.push_back({std::string(claim), index, transcript.turns()[index].text});
        }
      }
      return true;
    };

    if (evidence_into("STRENGTH", report.strengths)) continue;
    if (evidence_into("WEAKNESS", report.weaknesses)) continue;
    if (text::istarts_with(line, "ACTION")) {
      auto rest = text::trim(line.substr(6));
      if (!rest.empty() && rest.front() == ':') {
        auto action = text::trim(rest.substr(1));
        if (!action.empty()) report.actions.emplace_back(action);
      }
    }
  }
  return report;
}

FeedbackReport generate_feedback(const std::shared_ptr<LlmProvider>& provider,
                                 const Transcript& transcript, std::string_view goal,
                                 Millis budget) {
  if (transcript.user_turn_count() == 0) {
    throw Error(ErrorCode::EmptyTranscript, "the conversation has no user turns to review");
  }
  if (text::trim(goal).empty()) throw Error(ErrorCode::InvalidArgument, "feedback goal is empty");

  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string raw = complete(provider, build_feedback_request(transcript, goal, attempt > 0), budget);
    FeedbackReport report = parse_feedback_reply(raw, transcript, goal);
    if (!report.strengths.empty() && !report.weaknesses.empty() && !report.actions.empty()) {
      return report;
    }
  }
  throw Error(ErrorCode::UnparseableFeedback, "feedback reply was unusable after one retry");
}

std::string render_feedback_text(const FeedbackReport& report) {
  std::ostringstream out;
  out << "Goal: " << report.goal << "\n\n";
  auto section = [&](std::string_view title, const std::vector<Evidence>& items) {
    out << title << ":\n";
    for (const auto& e : items) {
      out << "- " << e.claim << '\n';
      out << "    (turn " << e.turn_index << ") \"" << e.quote << "\"\n";
    }
    out << '\n';
  };
  section("Strengths", report.strengths);
  section("Weaknesses", report.weaknesses);
  out << "Next steps:\n";
  for (const auto& a : report.actions) out << "- " << a << '\n';
  return out.str();
}

void to_json(nlohmann::json& j, const FeedbackReport& report) {
  auto evidence = [](const std::vector<Evidence>& items) {
    auto arr = nlohmann::json::array();
    for (const auto& e : items) {
      arr.push_back({{"claim", e.claim}, {"turn_index", e.turn_index}, {"quote", e.quote}});
    }
    return arr;
  };
  j = nlohmann::json{{"goal", report.goal},
                     {"strengths", evidence(report.strengths)},
                     {"weaknesses", evidence(report.weaknesses)},
                     {"actions", report.actions}};
}

void from_json(const nlohmann::json& j, FeedbackReport& report) {
  auto evidence = [](const nlohmann::json& arr) {
    std::vector<Evidence> out;
    for (const auto& e : arr) {
      out.push_back({e.at("claim").get<std::string>(), e.at("turn_index").get<std::size_t>(),
                     e.at("quote").get<std::string>()});
    }
    return out;
  };
  report.goal = j.at("goal").get<std::string>();
  report.strengths = evidence(j.at("strengths"));
  report.weaknesses = evidence(j.at("weaknesses"));
  report.actions = j.at("actions").get<std::vector<std::string>>();
}

}  // namespace vagent
