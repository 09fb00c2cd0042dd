#pragma once

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sgmem/embedding.hpp"
#include "sgmem/errors.hpp"
#include "sgmem/segmentation.hpp"

namespace sgmem {

// Generation defaults; configurable per client.
struct GenParams {
  double temperature = 0.7;
  double top_p = 0.8;
  int max_tokens = 8192;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string name() const = 0;
  // Returns the full completion text or throws (LlmUnavailable,
  // EmptyCompletion). Never partially mutates engine state.
  virtual std::string complete(const std::string& prompt) const = 0;
};

inline std::string prompt_fingerprint(std::string_view prompt) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(prompt);
  return os.str();
}

// Scripted client for tests and offline runs. Responses are keyed by the
// fingerprint of the exact prompt; unknown prompts throw unless a fallback
// response is configured.
class MockLlm final : public LlmClient {
 public:
  std::string name() const override { return "mock"; }

  void script(const std::string& prompt, const std::string& response) {
    responses_[prompt_fingerprint(prompt)] = response;
  }

  void set_fallback(const std::string& response) {
    fallback_ = response;
    has_fallback_ = true;
  }

  std::string complete(const std::string& prompt) const override {
    auto it = responses_.find(prompt_fingerprint(prompt));
    if (it != responses_.end()) return it->second;
    if (has_fallback_) return fallback_;
    throw LlmUnavailable("mock llm: no scripted response for fingerprint " +
                         prompt_fingerprint(prompt));
  }

 private:
  std::map<std::string, std::string> responses_;
  std::string fallback_;
  bool has_fallback_ = false;
};

namespace detail {

// Removes Markdown code fences (``` or ```json) from a completion.
inline std::string strip_code_fences(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 3, "```") == 0) {
      i += 3;
      // skip a language tag up to end of line
      while (i < text.size() && text[i] != '\n' && text[i] != '`') ++i;
      if (i < text.size() && text[i] == '\n') ++i;
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

inline std::string largest_span(const std::string& text, char open, char close) {
  size_t first = text.find(open);
  size_t last = text.rfind(close);
  if (first == std::string::npos || last == std::string::npos || last < first) {
    return "";
  }
  return text.substr(first, last - first + 1);
}

}  // namespace detail

// Parses an LLM completion expected to contain a JSON array. Repair policy:
// strip code fences, then retry once on the largest bracketed span. Throws
// MalformedJson when both attempts fail.
inline nlohmann::json parse_json_array_completion(const std::string& completion) {
  std::string cleaned = trim_copy(detail::strip_code_fences(completion));
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string candidate =
        attempt == 0 ? cleaned : detail::largest_span(cleaned, '[', ']');
    if (candidate.empty()) continue;
    auto parsed = nlohmann::json::parse(candidate, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) return parsed;
  }
  throw MalformedJson("completion is not a JSON array: " +
                      completion.substr(0, 120));
}

// Same policy for a JSON object (used by the judge's {"score": X} output).
inline nlohmann::json parse_json_object_completion(const std::string& completion) {
  std::string cleaned = trim_copy(detail::strip_code_fences(completion));
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string candidate =
        attempt == 0 ? cleaned : detail::largest_span(cleaned, '{', '}');
    if (candidate.empty()) continue;
    auto parsed = nlohmann::json::parse(candidate, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
  }
  throw MalformedJson("completion is not a JSON object: " +
                      completion.substr(0, 120));
}

}  // namespace sgmem
