#include "vagent/mock_providers.hpp"

#include <fstream>
#include <regex>

#include <nlohmann/json.hpp>

#include "text_util.hpp"

namespace vagent::mock {

std::string MockStt::transcribe(const AudioUtterance& utterance, std::string_view) {
  for (const auto& chunk : utterance.chunks) {
    if (!chunk.samples.empty()) return utterance.sidecar_text.value_or("");
  }
  return {};
}

namespace {

std::string mock_feedback(const std::string& prompt) {
  static const std::regex user_line(R"(^\[(\d+)\] USER: )");
  std::vector<std::string> indices;
  for (auto line : text::split_lines(prompt)) {
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(line.begin(), line.end(), m, user_line)) indices.push_back(m[1].str());
  }
  if (indices.empty()) return "No user turns to review.";
  std::string out;
  out += "STRENGTH " + indices.front() + ": Opened the conversation clearly and stayed on topic.\n";
  out += "WEAKNESS " + indices.back() + ": Closed without checking that the other person felt heard.\n";
  out += "ACTION: Ask one open-ended question before moving to your main point.\n";
  out += "ACTION: Summarize what you heard before you respond.\n";
  return out;
}

}  // namespace

std::string MockLlm::complete(const LlmRequest& request) {
  {
    std::lock_guard lock(mutex_);
    recorded_.push_back(request);
  }
  const std::string& last = request.messages.back().content;
  if (request.purpose == RequestPurpose::Feedback) return mock_feedback(last);

  std::string key(text::trim(last));
  if (auto it = cues_.find(key); it != cues_.end()) return it->second;
  return "EMOTION: Neutral\n" + key;
}

std::vector<LlmRequest> MockLlm::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

void MockLlm::clear_recorded() {
  std::lock_guard lock(mutex_);
  recorded_.clear();
}

Synthesis MockTts::synthesize(const SynthesisRequest& request) {
  const auto words = static_cast<std::int64_t>(std::max<std::size_t>(1, text::word_count(request.text)));
  Synthesis out;
  out.duration_ms = words * kMillisPerWord;
  std::vector<std::int16_t> silence(static_cast<std::size_t>(out.duration_ms * kTtsSampleRate / 1000), 0);
  out.chunks = chunk_pcm(silence, kTtsSampleRate);
  return out;
}

double MockModeration::score(std::string_view utterance) {
  for (const auto& term : blocklist_) {
    if (text::contains_icase(utterance, term)) return 1.0;
  }
  return 0.0;
}

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace

std::map<std::string, std::string> load_cue_table(const std::filesystem::path& path) {
  auto j = read_json(path);
  try {
    return j.at("cues").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

std::vector<std::string> load_blocklist(const std::filesystem::path& path) {
  auto j = read_json(path);
  try {
    return j.at("terms").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace vagent::mock
