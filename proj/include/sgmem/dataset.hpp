#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sgmem/conversation.hpp"
#include "sgmem/errors.hpp"

namespace sgmem {

struct QuestionRecord {
  std::string id;
  std::string text;
  std::string answer;
  std::string question_type;
  std::string question_date;  // dataset-native format, passed through verbatim
  std::vector<std::string> evidence_ids;           // session-level
  std::vector<std::string> evidence_dialogue_ids;  // raw dialogue ids (LoCoMo)
};

struct BenchmarkSplit {
  ConversationCorpus corpus;
  std::vector<QuestionRecord> questions;
  std::string name;
  size_t dropped_turns = 0;  // image-only turns without caption text
};

inline std::map<std::string, size_t> question_type_counts(const BenchmarkSplit& split) {
  std::map<std::string, size_t> counts;
  for (const auto& q : split.questions) ++counts[q.question_type];
  return counts;
}

namespace detail {

inline std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

inline int month_number(const std::string& name) {
  static const std::map<std::string, int> months = {
      {"january", 1}, {"february", 2}, {"march", 3},     {"april", 4},
      {"may", 5},     {"june", 6},     {"july", 7},      {"august", 8},
      {"september", 9}, {"october", 10}, {"november", 11}, {"december", 12},
      {"jan", 1},     {"feb", 2},      {"mar", 3},       {"apr", 4},
      {"jun", 6},     {"jul", 7},      {"aug", 8},       {"sep", 9},
      {"sept", 9},    {"oct", 10},     {"nov", 11},      {"dec", 12}};
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  auto it = months.find(lower);
  return it == months.end() ? 0 : it->second;
}

}  // namespace detail

// Normalizes the two dataset-native timestamp formats to ISO-8601 so
// lexicographic order is chronological:
//   "2023/05/30 (Tue) 23:40"   -> "2023-05-30T23:40:00"
//   "1:56 pm on 8 May, 2023"   -> "2023-05-08T13:56:00"
// Unrecognized inputs pass through unchanged.
inline std::string normalize_timestamp(const std::string& raw) {
  static const std::regex slash_form(
      R"((\d{4})/(\d{1,2})/(\d{1,2})(?:\s*\([^)]*\))?\s*(\d{1,2}):(\d{2}))");
  static const std::regex locomo_form(
      R"((\d{1,2}):(\d{2})\s*([ap]m)\s+on\s+(\d{1,2})\s+([A-Za-z]+),?\s+(\d{4}))",
      std::regex::icase);
  std::smatch m;
  if (std::regex_search(raw, m, slash_form)) {
    int hour = std::stoi(m[4]);
    return m[1].str() + "-" + detail::two_digits(std::stoi(m[2])) + "-" +
           detail::two_digits(std::stoi(m[3])) + "T" +
           detail::two_digits(hour) + ":" + m[5].str() + ":00";
  }
  if (std::regex_search(raw, m, locomo_form)) {
    int hour = std::stoi(m[1]) % 12;
    std::string ampm = m[3];
    if (ampm[0] == 'p' || ampm[0] == 'P') hour += 12;
    int month = detail::month_number(m[5]);
    if (month != 0) {
      return m[6].str() + "-" + detail::two_digits(month) + "-" +
             detail::two_digits(std::stoi(m[4])) + "T" +
             detail::two_digits(hour) + ":" + m[2].str() + ":00";
    }
  }
  return raw;
}

namespace detail {

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open dataset file: " + path);
  auto parsed = nlohmann::json::parse(is, nullptr, false);
  if (parsed.is_discarded()) throw SchemaError("not valid JSON: " + path);
  return parsed;
}

inline std::string json_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline const nlohmann::json& require_field(const nlohmann::json& obj,
                                           const char* field,
                                           const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw SchemaError("missing field '" + std::string(field) + "' at " + where);
  }
  return *it;
}

}  // namespace detail

// LongMemEval: a JSON array of question records, each embedding its own
// haystack sessions. Sessions shared between questions carry the same id
// and are ingested once; the corpus is the union.
inline BenchmarkSplit load_longmemeval(const std::string& path) {
  auto root = detail::load_json_file(path);
  if (!root.is_array()) throw SchemaError("expected a JSON array: " + path);

  BenchmarkSplit split;
  split.name = "longmemeval";
  split.corpus.origin = CorpusOrigin::LongMemEval;

  for (size_t i = 0; i < root.size(); ++i) {
    const auto& rec = root[i];
    std::string where = "record " + std::to_string(i);
    if (!rec.is_object()) throw SchemaError("not an object at " + where);

    QuestionRecord q;
    q.id = detail::json_to_string(detail::require_field(rec, "question_id", where));
    q.question_type =
        detail::json_to_string(detail::require_field(rec, "question_type", where));
    q.text = detail::json_to_string(detail::require_field(rec, "question", where));
    q.answer = detail::json_to_string(detail::require_field(rec, "answer", where));
    if (rec.contains("question_date")) {
      q.question_date = detail::json_to_string(rec["question_date"]);
    }
    if (rec.contains("answer_session_ids")) {
      for (const auto& sid : rec["answer_session_ids"]) {
        q.evidence_ids.push_back(detail::json_to_string(sid));
      }
    }

    const auto& session_ids = detail::require_field(rec, "haystack_session_ids", where);
    const auto& sessions = detail::require_field(rec, "haystack_sessions", where);
    if (!session_ids.is_array() || !sessions.is_array() ||
        session_ids.size() != sessions.size()) {
      throw SchemaError("haystack ids/sessions mismatch at " + where);
    }
    const nlohmann::json* dates = nullptr;
    if (rec.contains("haystack_dates") && rec["haystack_dates"].is_array() &&
        rec["haystack_dates"].size() == sessions.size()) {
      dates = &rec["haystack_dates"];
    }

    for (size_t s = 0; s < sessions.size(); ++s) {
      std::string sid = detail::json_to_string(session_ids[s]);
      if (split.corpus.has_session(sid)) continue;
      std::vector<RawTurn> raw;
      for (const auto& turn : sessions[s]) {
        RawTurn rt;
        std::string role =
            detail::json_to_string(detail::require_field(turn, "role", where));
        rt.speaker = role == "user" ? Speaker::User : Speaker::Assistant;
        rt.text = detail::json_to_string(detail::require_field(turn, "content", where));
        raw.push_back(std::move(rt));
      }
      std::string date;
      if (dates != nullptr) date = normalize_timestamp(detail::json_to_string((*dates)[s]));
      if (raw.empty()) continue;
      add_session(split.corpus, raw, sid, date);
    }
    split.questions.push_back(std::move(q));
  }
  return split;
}

namespace detail {

inline const std::map<int, std::string>& locomo_categories() {
  static const std::map<int, std::string> cats = {
      {1, "multi-hop"},
      {2, "temporal-reasoning"},
      {3, "open-domain"},
      {4, "single-hop"},
      {5, "adversarial"}};
  return cats;
}

}  // namespace detail

struct SampleSpec {
  size_t size = 0;
  uint64_t seed = 0;
};

// LoCoMo: multi-session persona dialogues with QA annotations. Session ids
// follow "<conv_id>_s<index>" with a zero-based index; dialogue-level
// evidence ids ("D16:9") are retained and also mapped to the containing
// session. Image-only turns keep their caption text or are dropped.
inline BenchmarkSplit load_locomo(const std::string& path,
                                  const SampleSpec* sample = nullptr) {
  auto root = detail::load_json_file(path);
  if (!root.is_array()) throw SchemaError("expected a JSON array: " + path);

  BenchmarkSplit split;
  split.name = "locomo";
  split.corpus.origin = CorpusOrigin::LoCoMo;
  std::unordered_map<std::string, std::string> dialogue_to_session;

  for (size_t i = 0; i < root.size(); ++i) {
    const auto& rec = root[i];
    std::string where = "record " + std::to_string(i);
    std::string conv_id =
        detail::json_to_string(detail::require_field(rec, "sample_id", where));
    const auto& conv = detail::require_field(rec, "conversation", where);
    std::string speaker_a;
    if (conv.contains("speaker_a")) speaker_a = detail::json_to_string(conv["speaker_a"]);

    // collect session_<k> keys in numeric order
    std::vector<int> session_numbers;
    static const std::regex session_key(R"(^session_(\d+)$)");
    for (auto it = conv.begin(); it != conv.end(); ++it) {
      std::smatch m;
      std::string key = it.key();
      if (std::regex_match(key, m, session_key) && it.value().is_array()) {
        session_numbers.push_back(std::stoi(m[1]));
      }
    }
    std::sort(session_numbers.begin(), session_numbers.end());
    int base = session_numbers.empty() ? 0 : session_numbers.front();

    for (int num : session_numbers) {
      std::string key = "session_" + std::to_string(num);
      std::string sid = conv_id + "_s" + std::to_string(num - base);
      std::string date;
      std::string date_key = key + "_date_time";
      if (conv.contains(date_key)) {
        date = normalize_timestamp(detail::json_to_string(conv[date_key]));
      }
      std::vector<RawTurn> raw;
      std::vector<std::string> dia_ids;
      for (const auto& turn : conv[key]) {
        std::string text;
        if (turn.contains("text")) text = trim_copy(detail::json_to_string(turn["text"]));
        if (text.empty() && turn.contains("blip_caption") &&
            !turn["blip_caption"].is_null()) {
          text = trim_copy(detail::json_to_string(turn["blip_caption"]));
        }
        if (text.empty()) {
          ++split.dropped_turns;
          continue;
        }
        RawTurn rt;
        std::string speaker;
        if (turn.contains("speaker")) speaker = detail::json_to_string(turn["speaker"]);
        rt.speaker = (!speaker_a.empty() && speaker == speaker_a)
                         ? Speaker::User
                         : Speaker::Assistant;
        rt.text = std::move(text);
        raw.push_back(std::move(rt));
        if (turn.contains("dia_id")) {
          dia_ids.push_back(detail::json_to_string(turn["dia_id"]));
        } else {
          dia_ids.push_back("");
        }
      }
      if (raw.empty()) continue;
      add_session(split.corpus, raw, sid, date);
      for (const auto& dia : dia_ids) {
        if (!dia.empty()) dialogue_to_session[dia] = sid;
      }
    }

    if (!rec.contains("qa")) continue;
    size_t qn = 0;
    for (const auto& qa : rec["qa"]) {
      QuestionRecord q;
      q.id = conv_id + "_q" + std::to_string(qn++);
      q.text = detail::json_to_string(detail::require_field(qa, "question", where));
      if (qa.contains("answer")) {
        q.answer = detail::json_to_string(qa["answer"]);
      } else if (qa.contains("adversarial_answer")) {
        q.answer = detail::json_to_string(qa["adversarial_answer"]);
      }
      int category = 0;
      if (qa.contains("category") && qa["category"].is_number()) {
        category = qa["category"].get<int>();
      }
      auto cit = detail::locomo_categories().find(category);
      q.question_type = cit == detail::locomo_categories().end()
                            ? "unknown"
                            : cit->second;
      if (qa.contains("evidence") && qa["evidence"].is_array()) {
        for (const auto& ev : qa["evidence"]) {
          std::string dia = detail::json_to_string(ev);
          q.evidence_dialogue_ids.push_back(dia);
          auto sit = dialogue_to_session.find(dia);
          if (sit != dialogue_to_session.end() &&
              std::find(q.evidence_ids.begin(), q.evidence_ids.end(),
                        sit->second) == q.evidence_ids.end()) {
            q.evidence_ids.push_back(sit->second);
          }
        }
      }
      split.questions.push_back(std::move(q));
    }
  }

  if (sample != nullptr) {
    if (sample->size > split.questions.size()) {
      throw SchemaError("sample size " + std::to_string(sample->size) +
                        " exceeds question count " +
                        std::to_string(split.questions.size()));
    }
    // Seeded Fisher-Yates, then keep the selected prefix in original order.
    std::vector<size_t> order(split.questions.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(sample->seed);
    for (size_t i = order.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    order.resize(sample->size);
    std::sort(order.begin(), order.end());
    std::vector<QuestionRecord> sampled;
    sampled.reserve(sample->size);
    for (size_t idx : order) sampled.push_back(std::move(split.questions[idx]));
    split.questions = std::move(sampled);
  }
  return split;
}

inline constexpr int kNativeSchemaVersion = 1;

// Engine-native corpus/question serialization, used for caching ingested
// benchmarks and for hand-written custom datasets.
inline void save_native(const BenchmarkSplit& split, const std::string& path) {
  nlohmann::json out;
  out["schema_version"] = kNativeSchemaVersion;
  out["name"] = split.name;
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& s : split.corpus.sessions) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& rid : s.round_ids) {
      for (const auto& tid : split.corpus.round(rid).turn_ids) {
        const Turn& t = split.corpus.turn(tid);
        nlohmann::json jt = {{"speaker", t.speaker == Speaker::User ? "user" : "assistant"},
                             {"text", t.text}};
        if (!t.timestamp.empty()) jt["timestamp"] = t.timestamp;
        turns.push_back(std::move(jt));
      }
    }
    nlohmann::json js = {{"id", s.id}, {"turns", std::move(turns)}};
    if (!s.timestamp.empty()) js["timestamp"] = s.timestamp;
    sessions.push_back(std::move(js));
  }
  out["sessions"] = std::move(sessions);
  nlohmann::json questions = nlohmann::json::array();
  for (const auto& q : split.questions) {
    nlohmann::json jq = {{"id", q.id},
                         {"question", q.text},
                         {"answer", q.answer},
                         {"type", q.question_type}};
    if (!q.question_date.empty()) jq["date"] = q.question_date;
    if (!q.evidence_ids.empty()) jq["evidence"] = q.evidence_ids;
    if (!q.evidence_dialogue_ids.empty()) {
      jq["evidence_dialogues"] = q.evidence_dialogue_ids;
    }
    questions.push_back(std::move(jq));
  }
  out["questions"] = std::move(questions);

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for write: " + path);
  os << out.dump(2) << "\n";
  if (!os) throw IoError("write failed: " + path);
}

inline BenchmarkSplit load_native(const std::string& path) {
  auto root = detail::load_json_file(path);
  if (!root.is_object()) throw SchemaError("expected a JSON object: " + path);
  int version = root.value("schema_version", -1);
  if (version != kNativeSchemaVersion) {
    throw SchemaVersionMismatch("native dataset schema_version " +
                                std::to_string(version) + ", expected " +
                                std::to_string(kNativeSchemaVersion));
  }
  BenchmarkSplit split;
  split.name = root.value("name", "custom");
  split.corpus.origin = CorpusOrigin::Custom;
  for (const auto& js : detail::require_field(root, "sessions", path)) {
    std::string sid = detail::json_to_string(detail::require_field(js, "id", path));
    std::vector<RawTurn> raw;
    for (const auto& jt : detail::require_field(js, "turns", path)) {
      RawTurn rt;
      std::string speaker =
          detail::json_to_string(detail::require_field(jt, "speaker", path));
      rt.speaker = speaker == "user" ? Speaker::User : Speaker::Assistant;
      rt.text = detail::json_to_string(detail::require_field(jt, "text", path));
      rt.timestamp = jt.value("timestamp", "");
      raw.push_back(std::move(rt));
    }
    add_session(split.corpus, raw, sid, js.value("timestamp", ""));
  }
  if (root.contains("questions")) {
    for (const auto& jq : root["questions"]) {
      QuestionRecord q;
      q.id = detail::json_to_string(detail::require_field(jq, "id", path));
      q.text = detail::json_to_string(detail::require_field(jq, "question", path));
      q.answer = jq.value("answer", "");
      q.question_type = jq.value("type", "custom");
      q.question_date = jq.value("date", "");
      if (jq.contains("evidence")) {
        for (const auto& e : jq["evidence"]) {
          q.evidence_ids.push_back(detail::json_to_string(e));
        }
      }
      if (jq.contains("evidence_dialogues")) {
        for (const auto& e : jq["evidence_dialogues"]) {
          q.evidence_dialogue_ids.push_back(detail::json_to_string(e));
        }
      }
      split.questions.push_back(std::move(q));
    }
  }
  return split;
}

}  // namespace sgmem
