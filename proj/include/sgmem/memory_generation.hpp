#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgmem/conversation.hpp"
#include "sgmem/llm.hpp"
#include "sgmem/prompts.hpp"

namespace sgmem {

enum class MemoryKind { Summary, Fact, Insight };

inline const char* memory_kind_name(MemoryKind k) {
  switch (k) {
    case MemoryKind::Summary: return "summary";
    case MemoryKind::Fact: return "fact";
    default: return "insight";
  }
}

struct GeneratedMemory {
  std::string id;
  MemoryKind kind = MemoryKind::Summary;
  // Session the unit was derived from; empty for insights, which merge
  // facts across sessions.
  std::string source_session_id;
  std::string content;
  std::string timestamp;
};

inline std::string build_summary_prompt(const ConversationCorpus& corpus,
                                        const Session& session) {
  std::string prompt(prompts::kSummaryPrompt);
  prompt += "\n\n";
  prompt += render_dialogue(corpus, session);
  prompt += "\n";
  return prompt;
}

inline std::string build_fact_prompt(const ConversationCorpus& corpus,
                                     const Session& session) {
  std::string prompt(prompts::kFactPrompt);
  prompt += "\n\n";
  prompt += render_dialogue(corpus, session);
  prompt += "\n";
  return prompt;
}

inline std::string build_insight_prompt(const std::vector<GeneratedMemory>& facts) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& f : facts) {
    records.push_back({{"timestamp", f.timestamp}, {"content", f.content}});
  }
  std::string prompt(prompts::kInsightPrompt);
  prompt += "\n\n";
  prompt += records.dump(2);
  prompt += "\n";
  return prompt;
}

// One summary per session. The summary inherits the session timestamp.
inline GeneratedMemory generate_summary(const LlmClient& client,
                                        const ConversationCorpus& corpus,
                                        const Session& session) {
  std::string completion = client.complete(build_summary_prompt(corpus, session));
  if (trim_copy(completion).empty()) {
    throw EmptyCompletion("empty summary completion for session " + session.id);
  }
  GeneratedMemory m;
  m.id = "summary_" + session.id;
  m.kind = MemoryKind::Summary;
  m.source_session_id = session.id;
  m.content = trim_copy(completion);
  m.timestamp = session.timestamp;
  return m;
}

// Facts come back as a JSON list of strings; an empty list is valid. Each
// fact inherits the session timestamp.
inline std::vector<GeneratedMemory> extract_facts(const LlmClient& client,
                                                  const ConversationCorpus& corpus,
                                                  const Session& session) {
  std::string completion = client.complete(build_fact_prompt(corpus, session));
  auto parsed = parse_json_array_completion(completion);
  std::vector<GeneratedMemory> out;
  size_t j = 0;
  for (const auto& item : parsed) {
    if (!item.is_string()) {
      throw MalformedJson("fact list entry is not a string for session " +
                          session.id);
    }
    std::string content = trim_copy(item.get<std::string>());
    if (content.empty()) continue;
    GeneratedMemory m;
    m.id = "fact_" + session.id + "_" + std::to_string(j++);
    m.kind = MemoryKind::Fact;
    m.source_session_id = session.id;
    m.content = std::move(content);
    m.timestamp = session.timestamp;
    out.push_back(std::move(m));
  }
  return out;
}

// Insights reflect over the full fact list (in timestamp order) in one
// batch. Each parsed {timestamp, content} object becomes an insight; the
// prompt instructs the model to stamp each with the latest merged fact time.
inline std::vector<GeneratedMemory> reflect_insights(
    const LlmClient& client, std::vector<GeneratedMemory> facts) {
  std::vector<GeneratedMemory> out;
  if (facts.empty()) return out;
  std::stable_sort(facts.begin(), facts.end(),
                   [](const GeneratedMemory& a, const GeneratedMemory& b) {
                     return a.timestamp < b.timestamp;
                   });
  std::string completion = client.complete(build_insight_prompt(facts));
  auto parsed = parse_json_array_completion(completion);
  size_t z = 0;
  for (const auto& item : parsed) {
    if (!item.is_object() || !item.contains("content")) {
      throw MalformedJson("insight entry missing content");
    }
    std::string content = trim_copy(item["content"].get<std::string>());
    if (content.empty()) continue;
    GeneratedMemory m;
    m.id = "insight_" + std::to_string(z++);
    m.kind = MemoryKind::Insight;
    m.content = std::move(content);
    if (item.contains("timestamp") && item["timestamp"].is_string()) {
      m.timestamp = item["timestamp"].get<std::string>();
    }
    out.push_back(std::move(m));
  }
  return out;
}

// Runs summary and fact generation over every session, then one insight
// reflection over all facts. Sessions whose completions stay malformed
// after the repair policy are skipped and reported through `warn`.
inline std::vector<GeneratedMemory> generate_all_memories(
    const LlmClient& client, const ConversationCorpus& corpus,
    bool summaries, bool facts, bool insights,
    const std::function<void(const std::string&)>& warn = nullptr) {
  std::vector<GeneratedMemory> out;
  std::vector<GeneratedMemory> fact_units;
  auto report = [&](const std::string& msg) {
    if (warn) warn(msg);
  };
  for (const auto& session : corpus.sessions) {
    if (summaries) {
      try {
        out.push_back(generate_summary(client, corpus, session));
      } catch (const Error& e) {
        report("summary skipped for " + session.id + ": " + e.what());
      }
    }
    if (facts || insights) {
      try {
        auto fs = extract_facts(client, corpus, session);
        fact_units.insert(fact_units.end(), fs.begin(), fs.end());
      } catch (const Error& e) {
        report("facts skipped for " + session.id + ": " + e.what());
      }
    }
  }
  if (insights && !fact_units.empty()) {
    try {
      auto ins = reflect_insights(client, fact_units);
      out.insert(out.end(), ins.begin(), ins.end());
    } catch (const Error& e) {
      report(std::string("insights skipped: ") + e.what());
    }
  }
  if (facts) {
    out.insert(out.end(), fact_units.begin(), fact_units.end());
  }
  return out;
}

}  // namespace sgmem
