#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgmem/dataset.hpp"
#include "sgmem/llm.hpp"
#include "sgmem/prompts.hpp"
#include "sgmem/retrieval.hpp"

namespace sgmem {

inline std::string build_response_prompt(const RelevantContext& ctx) {
  std::string prompt(prompts::kResponsePrompt);
  prompt += "\n\n";
  prompt += render_context(ctx);
  prompt += "\n---Question---\n\n";
  prompt += ctx.query;
  prompt += "\n";
  return prompt;
}

inline std::string build_judge_prompt(const std::string& question,
                                      const std::string& gold_answer,
                                      const std::string& candidate) {
  std::string prompt(prompts::kEvaluationPrompt);
  prompt += "\n\n---Question---\n\n";
  prompt += question;
  prompt += "\n\n---Gold Answer---\n\n";
  prompt += gold_answer;
  prompt += "\n\n---Candidate Answer---\n\n";
  prompt += candidate;
  prompt += "\n";
  return prompt;
}

// Retrieves context for the question and asks the client for a response.
// The completion is returned verbatim.
inline std::pair<std::string, RelevantContext> answer_question(
    const LlmClient& client, const IndexTables& tables,
    const SentenceGraph* graph, const EmbeddingProvider& provider,
    const RetrievalConfig& config, const QuestionRecord& q) {
  RelevantContext ctx =
      retrieve(tables, graph, provider, config, q.text, q.question_date);
  std::string response = client.complete(build_response_prompt(ctx));
  return {response, ctx};
}

struct JudgeOutcome {
  int score = 0;
  bool malformed = false;
};

// Binary LLM-as-judge scoring. A completion that stays unparseable after
// one retry counts as incorrect and is flagged.
inline JudgeOutcome judge(const LlmClient& client, const std::string& question,
                          const std::string& gold_answer,
                          const std::string& candidate) {
  std::string prompt = build_judge_prompt(question, gold_answer, candidate);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string completion = client.complete(prompt);
    try {
      auto obj = parse_json_object_completion(completion);
      if (obj.contains("score")) {
        const auto& v = obj["score"];
        int score = -1;
        if (v.is_number_integer()) {
          score = v.get<int>();
        } else if (v.is_string()) {
          std::string s = trim_copy(v.get<std::string>());
          if (s == "0") score = 0;
          if (s == "1") score = 1;
        }
        if (score == 0 || score == 1) return {score, false};
      }
    } catch (const MalformedJson&) {
      // fall through to retry
    }
  }
  return {0, true};
}

// One benchmark question, result-record shape mirrors the retrieval log
// format: seeds, candidate grouping, final chunks, response and score.
struct QaResult {
  std::string question_id;
  std::string question_type;
  std::string question_date;
  std::string question;
  std::string gold_answer;
  std::string variant;
  std::vector<std::string> topk_sentence_ids;
  std::map<std::string, std::vector<std::string>> chunk_to_sentences;
  std::vector<std::string> topk_chunk_ids;
  std::string response;
  int score = 0;
  bool judged = false;
  bool judge_malformed = false;
  std::string error;
  double latency_ms = 0.0;
};

// Latency is runtime telemetry and stays out of the serialized record so
// logs are byte-deterministic under a scripted client.
inline nlohmann::json qa_result_to_json(const QaResult& r) {
  nlohmann::json out = {
      {"question_id", r.question_id},
      {"question_type", r.question_type},
      {"question", r.question},
      {"answer", r.gold_answer},
      {"variant", r.variant},
      {"topk_sentence_ids", r.topk_sentence_ids},
      {"chunk_to_sentences", r.chunk_to_sentences},
      {"topk_chunk_ids", r.topk_chunk_ids},
      {"response", r.response},
      {"score", r.score},
  };
  if (!r.question_date.empty()) out["question_date"] = r.question_date;
  if (r.judge_malformed) out["judge_malformed"] = true;
  if (!r.error.empty()) out["error"] = r.error;
  if (!r.judged) out["judged"] = false;
  return out;
}

inline QaResult qa_result_from_json(const nlohmann::json& j) {
  QaResult r;
  r.question_id = j.value("question_id", "");
  r.question_type = j.value("question_type", "");
  r.question_date = j.value("question_date", "");
  r.question = j.value("question", "");
  r.gold_answer = j.value("answer", "");
  r.variant = j.value("variant", "");
  if (j.contains("topk_sentence_ids")) {
    r.topk_sentence_ids = j["topk_sentence_ids"].get<std::vector<std::string>>();
  }
  if (j.contains("chunk_to_sentences")) {
    r.chunk_to_sentences =
        j["chunk_to_sentences"].get<std::map<std::string, std::vector<std::string>>>();
  }
  if (j.contains("topk_chunk_ids")) {
    r.topk_chunk_ids = j["topk_chunk_ids"].get<std::vector<std::string>>();
  }
  r.response = j.value("response", "");
  r.score = j.value("score", 0);
  r.judged = j.value("judged", true);
  r.judge_malformed = j.value("judge_malformed", false);
  r.error = j.value("error", "");
  return r;
}

struct AccuracyReport {
  std::string variant;
  size_t K = 0;
  size_t questions = 0;
  bool judged = false;  // accuracy is meaningful only when an LLM judged
  double accuracy = 0.0;
  std::map<std::string, double> per_type_accuracy;
  std::map<std::string, size_t> per_type_counts;
  // LLM-free evidence-recall proxy over questions with evidence ids.
  double recall_full = 0.0;     // evidence set fully covered
  double recall_overlap = 0.0;  // mean |evidence ∩ retrieved| / |evidence|
  size_t with_evidence = 0;
};

inline nlohmann::json report_to_json(const AccuracyReport& r) {
  return nlohmann::json{{"variant", r.variant},
                        {"K", r.K},
                        {"questions", r.questions},
                        {"judged", r.judged},
                        {"accuracy", r.accuracy},
                        {"per_type_accuracy", r.per_type_accuracy},
                        {"per_type_counts", r.per_type_counts},
                        {"recall_full", r.recall_full},
                        {"recall_overlap", r.recall_overlap},
                        {"with_evidence", r.with_evidence}};
}

inline std::string render_report_table(const std::vector<AccuracyReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "variant" << std::right << std::setw(7)
     << "K" << std::setw(11) << "questions" << std::setw(10) << "accuracy"
     << std::setw(13) << "recall_full" << std::setw(16) << "recall_overlap"
     << "\n";
  os << std::string(71, '-') << "\n";
  for (const auto& r : reports) {
    os << std::left << std::setw(14) << r.variant << std::right << std::setw(7)
       << r.K << std::setw(11) << r.questions << std::setw(10) << std::fixed
       << std::setprecision(3) << (r.judged ? r.accuracy : 0.0) << std::setw(13)
       << r.recall_full << std::setw(16) << r.recall_overlap << "\n";
  }
  return os.str();
}

// Per-question evidence recall against retrieved chunks, mapped to session
// ids. Returns {fully-covered, overlap-ratio} or nullopt-like flag via
// has_evidence=false.
struct EvidenceRecall {
  bool has_evidence = false;
  bool full = false;
  double overlap = 0.0;
};

inline EvidenceRecall evidence_recall(const ConversationCorpus& corpus,
                                      const QuestionRecord& q,
                                      const std::vector<std::string>& chunk_ids) {
  EvidenceRecall out;
  if (q.evidence_ids.empty()) return out;
  out.has_evidence = true;
  std::set<std::string> retrieved;
  for (const auto& cid : chunk_ids) {
    retrieved.insert(chunk_session_id(corpus, cid));
  }
  size_t covered = 0;
  for (const auto& ev : q.evidence_ids) {
    if (retrieved.count(ev)) ++covered;
  }
  out.full = covered == q.evidence_ids.size();
  out.overlap = static_cast<double>(covered) /
                static_cast<double>(q.evidence_ids.size());
  return out;
}

// Engine artifacts a benchmark run needs. `graph_for` may return nullptr
// for RAG configs; SGMem configs with a null graph fail per question.
struct EngineView {
  const IndexTables* tables = nullptr;
  const EmbeddingProvider* provider = nullptr;
  std::function<const SentenceGraph*(const RetrievalConfig&)> graph_for;
};

struct BenchmarkOptions {
  const LlmClient* answer_client = nullptr;  // null: retrieval-only run
  const LlmClient* judge_client = nullptr;   // null: scores stay 0, judged=false
  std::string log_path;                      // empty: no persistent log
  size_t parallelism = 1;
};

namespace detail {

inline QaResult run_single_question(const EngineView& engine,
                                    const RetrievalConfig& config,
                                    const QuestionRecord& q,
                                    const BenchmarkOptions& options) {
  QaResult r;
  r.question_id = q.id;
  r.question_type = q.question_type;
  r.question_date = q.question_date;
  r.question = q.text;
  r.gold_answer = q.answer;
  r.variant = variant_name(config);
  auto t0 = std::chrono::steady_clock::now();
  try {
    const SentenceGraph* graph =
        engine.graph_for ? engine.graph_for(config) : nullptr;
    RelevantContext ctx = retrieve(*engine.tables, graph, *engine.provider,
                                   config, q.text, q.question_date);
    r.topk_sentence_ids = ctx.seed_sentence_ids;
    for (const auto& [chunk_id, members] : ctx.candidate_chunks) {
      r.chunk_to_sentences[chunk_id] =
          std::vector<std::string>(members.begin(), members.end());
    }
    r.topk_chunk_ids = ctx.ranked_chunk_ids;
    if (options.answer_client != nullptr) {
      r.response = options.answer_client->complete(build_response_prompt(ctx));
      if (options.judge_client != nullptr) {
        auto outcome = judge(*options.judge_client, q.text, q.answer, r.response);
        r.score = outcome.score;
        r.judge_malformed = outcome.malformed;
        r.judged = true;
      }
    }
  } catch (const Error& e) {
    r.error = e.what();
    r.score = 0;
  }
  auto t1 = std::chrono::steady_clock::now();
  r.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return r;
}

inline std::vector<QaResult> load_result_log(const std::string& path) {
  std::vector<QaResult> out;
  std::ifstream is(path);
  if (!is) return out;
  std::string line;
  while (std::getline(is, line)) {
    if (trim_copy(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    out.push_back(qa_result_from_json(j));
  }
  return out;
}

inline AccuracyReport aggregate(const std::string& variant, size_t K,
                                const ConversationCorpus& corpus,
                                const std::vector<const QaResult*>& results,
                                const std::vector<QuestionRecord>& questions) {
  AccuracyReport rep;
  rep.variant = variant;
  rep.K = K;
  rep.questions = results.size();
  std::unordered_map<std::string, const QuestionRecord*> by_id;
  for (const auto& q : questions) by_id[q.id] = &q;

  double score_sum = 0.0;
  std::map<std::string, double> type_sum;
  double full_sum = 0.0;
  double overlap_sum = 0.0;
  for (const QaResult* r : results) {
    score_sum += r->score;
    type_sum[r->question_type] += r->score;
    ++rep.per_type_counts[r->question_type];
    rep.judged = rep.judged || r->judged;
    auto qit = by_id.find(r->question_id);
    if (qit != by_id.end()) {
      auto rec = evidence_recall(corpus, *qit->second, r->topk_chunk_ids);
      if (rec.has_evidence) {
        ++rep.with_evidence;
        full_sum += rec.full ? 1.0 : 0.0;
        overlap_sum += rec.overlap;
      }
    }
  }
  if (!results.empty()) {
    rep.accuracy = score_sum / static_cast<double>(results.size());
  }
  for (const auto& [type, sum] : type_sum) {
    rep.per_type_accuracy[type] =
        sum / static_cast<double>(rep.per_type_counts[type]);
  }
  if (rep.with_evidence > 0) {
    rep.recall_full = full_sum / static_cast<double>(rep.with_evidence);
    rep.recall_overlap = overlap_sum / static_cast<double>(rep.with_evidence);
  }
  return rep;
}

}  // namespace detail

struct BenchmarkOutcome {
  std::vector<AccuracyReport> reports;
  std::vector<QaResult> results;
};

// Answers and judges every (config, question) pair. The JSON-lines result
// log is appended incrementally; rerunning with the same log path resumes
// by (variant, question id). Per-question failures are recorded and the run
// continues.
inline BenchmarkOutcome run_benchmark(const BenchmarkSplit& split,
                                      const std::vector<RetrievalConfig>& configs,
                                      const EngineView& engine,
                                      const BenchmarkOptions& options = {}) {
  BenchmarkOutcome outcome;
  std::set<std::pair<std::string, std::string>> done;
  if (!options.log_path.empty()) {
    outcome.results = detail::load_result_log(options.log_path);
    for (const auto& r : outcome.results) done.insert({r.variant, r.question_id});
  }

  std::ofstream log;
  if (!options.log_path.empty()) {
    log.open(options.log_path, std::ios::app);
    if (!log) throw IoError("cannot open result log: " + options.log_path);
  }

  size_t parallelism = std::max<size_t>(1, options.parallelism);
  for (const auto& config : configs) {
    std::string variant = variant_name(config);
    std::vector<const QuestionRecord*> pending;
    for (const auto& q : split.questions) {
      if (!done.count({variant, q.id})) pending.push_back(&q);
    }
    for (size_t start = 0; start < pending.size(); start += parallelism) {
      size_t end = std::min(pending.size(), start + parallelism);
      std::vector<std::future<QaResult>> batch;
      if (parallelism > 1) {
        for (size_t i = start; i < end; ++i) {
          const QuestionRecord* q = pending[i];
          batch.push_back(std::async(std::launch::async, [&, q] {
            return detail::run_single_question(engine, config, *q, options);
          }));
        }
      }
      // Results are appended in question order regardless of completion
      // order, so logs stay byte-deterministic.
      for (size_t i = start; i < end; ++i) {
        QaResult r = parallelism == 1
                         ? detail::run_single_question(engine, config,
                                                       *pending[i], options)
                         : batch[i - start].get();
        if (log.is_open()) {
          log << qa_result_to_json(r).dump() << "\n";
          log.flush();
        }
        outcome.results.push_back(std::move(r));
      }
    }
  }

  // Aggregate per variant, in config order.
  for (const auto& config : configs) {
    std::string variant = variant_name(config);
    std::vector<const QaResult*> group;
    for (const auto& r : outcome.results) {
      if (r.variant == variant) group.push_back(&r);
    }
    outcome.reports.push_back(detail::aggregate(variant, config.K, split.corpus,
                                                group, split.questions));
  }
  return outcome;
}

}  // namespace sgmem
