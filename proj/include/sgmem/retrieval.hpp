#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sgmem/embedding.hpp"
#include "sgmem/errors.hpp"
#include "sgmem/index_store.hpp"
#include "sgmem/sentence_graph.hpp"

namespace sgmem {

enum class Method { Rag, SgMem };

inline const char* method_name(Method m) {
  return m == Method::Rag ? "RAG" : "SGMem";
}

struct RetrievalConfig {
  Method method = Method::SgMem;
  Granularity granularity = Granularity::Session;
  bool include_summaries = false;
  bool include_facts = false;
  bool include_insights = false;
  size_t K = 5;       // retention cap per memory table and for ranked chunks
  uint32_t k = 3;     // KNN neighbors per sentence at graph build
  uint32_t h = 1;     // hop count for graph expansion
  size_t n = 15;      // max retrieved sentence nodes
  double gamma = 1.0;  // sentence similarity threshold, in [0, 2]
  double epsilon = 1.0;
  NeighborScorer::Kind scorer = NeighborScorer::Kind::CosineDense;
  size_t max_chars = 0;  // optional context size guard; 0 disables
};

// Variant code, e.g. "RAG-T", "SGMem-SF", "SGMem-SMFI".
inline std::string variant_name(const RetrievalConfig& config) {
  std::string name = method_name(config.method);
  name += '-';
  name += granularity_code(config.granularity);
  if (config.include_summaries) name += 'M';
  if (config.include_facts) name += 'F';
  if (config.include_insights) name += 'I';
  return name;
}

struct RankedChunk {
  std::string chunk_id;
  double score = 0.0;
  // Retrieved and neighboring sentences with their shifted similarity;
  // empty for chunks ranked directly by chunk embedding (RAG).
  std::map<std::string, double> contributing;
  std::string text;
  std::string timestamp;
};

struct MemoryHit {
  std::string id;
  std::string content;
  std::string timestamp;
  double score = 0.0;
};

struct RelevantContext {
  std::string variant;
  std::string query;
  std::string query_date;

  // Final top-K chunks in chronological order (timestamp, then chunk id).
  std::vector<RankedChunk> chunks;
  // The same chunks in rank order (ids only).
  std::vector<std::string> ranked_chunk_ids;
  // Retrieved seed sentences in rank order (before expansion).
  std::vector<std::string> seed_sentence_ids;
  // Candidate grouping over the whole expanded sentence set, including
  // chunks that did not survive the top-K cut.
  std::map<std::string, std::set<std::string>> candidate_chunks;

  std::vector<MemoryHit> summaries;
  std::vector<MemoryHit> facts;
  std::vector<MemoryHit> insights;
};

namespace detail {

inline std::vector<MemoryHit> memory_section(const IndexTables& tables,
                                             TableKind kind,
                                             const EmbeddingVector& query_vec,
                                             size_t K, double epsilon) {
  std::vector<MemoryHit> out;
  for (const auto& hit : search_topk(tables, kind, query_vec, K, epsilon)) {
    out.push_back({hit.ref->unit_id, hit.ref->text, hit.ref->timestamp, hit.score});
  }
  return out;
}

inline void fill_chunk_payload(const IndexTables& tables, TableKind kind,
                               RankedChunk* chunk) {
  const MemoryUnitRef* unit = tables.find(kind, chunk->chunk_id);
  if (unit == nullptr) {
    throw UnknownNode("chunk missing from index: " + chunk->chunk_id);
  }
  chunk->text = unit->text;
  chunk->timestamp = unit->timestamp;
}

// Rank order: score desc, contributing-set size desc, chunk id asc.
inline void sort_ranked(std::vector<RankedChunk>& chunks) {
  std::sort(chunks.begin(), chunks.end(),
            [](const RankedChunk& a, const RankedChunk& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.contributing.size() != b.contributing.size()) {
                return a.contributing.size() > b.contributing.size();
              }
              return a.chunk_id < b.chunk_id;
            });
}

}  // namespace detail

// The retrieval pipeline. RAG ranks chunks directly by chunk-embedding
// similarity; SGMem retrieves sentences, expands them over the graph, maps
// them back to chunks and ranks chunks by the mean shifted similarity of
// their retrieved-plus-neighbor sentences. Either way the top-K memory
// units of every enabled generated-memory table join the context.
inline RelevantContext retrieve(const IndexTables& tables,
                                const SentenceGraph* graph,
                                const EmbeddingProvider& provider,
                                const RetrievalConfig& config,
                                const std::string& query,
                                const std::string& query_date = "") {
  RelevantContext ctx;
  ctx.variant = variant_name(config);
  ctx.query = query;
  ctx.query_date = query_date;

  EmbeddingVector query_vec = provider.embed_one(query);

  if (config.include_summaries) {
    ctx.summaries = detail::memory_section(tables, TableKind::Summary, query_vec,
                                           config.K, config.epsilon);
  }
  if (config.include_facts) {
    ctx.facts = detail::memory_section(tables, TableKind::Fact, query_vec,
                                       config.K, config.epsilon);
  }
  if (config.include_insights) {
    ctx.insights = detail::memory_section(tables, TableKind::Insight, query_vec,
                                          config.K, config.epsilon);
  }

  TableKind chunk_table = table_for_granularity(config.granularity);
  std::vector<RankedChunk> ranked;

  if (config.method == Method::Rag) {
    for (const auto& hit :
         search_topk(tables, chunk_table, query_vec, config.K, config.epsilon)) {
      RankedChunk chunk;
      chunk.chunk_id = hit.ref->unit_id;
      chunk.score = hit.score;
      chunk.text = hit.ref->text;
      chunk.timestamp = hit.ref->timestamp;
      ranked.push_back(std::move(chunk));
      ctx.candidate_chunks[ranked.back().chunk_id];
    }
  } else {
    if (graph == nullptr) {
      throw GraphMissing("SGMem retrieval requires a sentence graph");
    }
    if (graph->granularity != config.granularity) {
      throw GraphMissing(std::string("graph built for granularity ") +
                         granularity_name(graph->granularity) +
                         ", config wants " +
                         granularity_name(config.granularity));
    }
    auto seeds = search_sentences(tables, query_vec, config.gamma, config.n,
                                  config.epsilon);
    std::vector<std::string> seed_ids;
    seed_ids.reserve(seeds.size());
    for (const auto& hit : seeds) seed_ids.push_back(hit.ref->unit_id);
    ctx.seed_sentence_ids = seed_ids;

    auto expanded = expand_hops(*graph, seed_ids, config.h);
    // Raw cosine per candidate sentence; neighbors acquired by expansion get
    // theirs computed against the query on demand. Epsilon is applied once
    // after aggregation so the shift moves every chunk score exactly and can
    // never reorder ties.
    std::map<std::string, double> raw_sims;
    for (const auto& sid : expanded) {
      const MemoryUnitRef* unit = tables.find(TableKind::Sentence, sid);
      if (unit == nullptr) {
        throw UnknownNode("expanded sentence missing from index: " + sid);
      }
      raw_sims[sid] = cosine(query_vec, unit->vector);
    }

    ctx.candidate_chunks = sentences_to_chunks(*graph, expanded);
    for (const auto& [chunk_id, members] : ctx.candidate_chunks) {
      RankedChunk chunk;
      chunk.chunk_id = chunk_id;
      double total = 0.0;
      for (const auto& sid : members) {
        double raw = raw_sims.at(sid);
        chunk.contributing[sid] = raw;
        total += raw;
      }
      chunk.score = total / static_cast<double>(members.size());
      detail::fill_chunk_payload(tables, chunk_table, &chunk);
      ranked.push_back(std::move(chunk));
    }
    // Rank on the raw means, then shift; comparisons never see epsilon.
    detail::sort_ranked(ranked);
    if (ranked.size() > config.K) ranked.resize(config.K);
    for (auto& chunk : ranked) {
      chunk.score += config.epsilon;
      for (auto& [_, sim] : chunk.contributing) sim += config.epsilon;
    }
  }

  for (const auto& chunk : ranked) ctx.ranked_chunk_ids.push_back(chunk.chunk_id);

  // Chronological final ordering for the rendered context.
  ctx.chunks = std::move(ranked);
  std::sort(ctx.chunks.begin(), ctx.chunks.end(),
            [](const RankedChunk& a, const RankedChunk& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              return a.chunk_id < b.chunk_id;
            });

  if (config.max_chars > 0) {
    size_t used = 0;
    std::vector<RankedChunk> kept;
    for (auto& chunk : ctx.chunks) {
      if (used + chunk.text.size() > config.max_chars && !kept.empty()) break;
      used += chunk.text.size();
      kept.push_back(std::move(chunk));
    }
    ctx.chunks = std::move(kept);
  }
  return ctx;
}

// Deterministic text rendering of a context. Sections appear only when they
// have content; byte-identical across runs for the same context.
inline std::string render_context(const RelevantContext& ctx) {
  std::string out = "# Relevant context\n";
  if (!ctx.query_date.empty()) {
    out += "Query date: ";
    out += ctx.query_date;
    out += "\n";
  }
  if (!ctx.chunks.empty()) {
    out += "\n## Conversation excerpts\n";
    for (const auto& chunk : ctx.chunks) {
      out += "[";
      out += chunk.timestamp;
      out += "] ";
      out += chunk.text;
      out += "\n";
    }
  }
  auto section = [&out](const char* title, const std::vector<MemoryHit>& hits) {
    if (hits.empty()) return;
    out += "\n## ";
    out += title;
    out += "\n";
    for (const auto& hit : hits) {
      out += "- ";
      if (!hit.timestamp.empty()) {
        out += "[";
        out += hit.timestamp;
        out += "] ";
      }
      out += hit.content;
      out += "\n";
    }
  };
  section("Summaries", ctx.summaries);
  section("Facts", ctx.facts);
  section("Insights", ctx.insights);
  return out;
}

}  // namespace sgmem
