#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgmem/bm25.hpp"
#include "sgmem/conversation.hpp"
#include "sgmem/embedding.hpp"
#include "sgmem/errors.hpp"
#include "sgmem/index_store.hpp"
#include "sgmem/serialization.hpp"

namespace sgmem {

// Nodes are chunks (at one granularity) and sentences. Membership edges tie
// each sentence to its parent chunk; KNN edges tie sentences to their
// nearest neighbors. The KNN relation is computed directed per source
// sentence (top-k under the scorer, ascending-id tie-break, self excluded)
// and stored as the undirected union of both directions.
class SentenceGraph {
 public:
  Granularity granularity = Granularity::Session;
  uint32_t k = 0;
  NeighborScorer::Kind scorer_kind = NeighborScorer::Kind::CosineDense;

  std::vector<std::string> chunk_ids;     // build order
  std::vector<std::string> sentence_ids;  // corpus order

  bool has_sentence(const std::string& id) const {
    return sentence_pos_.count(id) > 0;
  }
  bool has_chunk(const std::string& id) const { return chunk_pos_.count(id) > 0; }

  const std::vector<std::string>& members_of(const std::string& chunk_id) const {
    auto it = chunk_members_.find(chunk_id);
    if (it == chunk_members_.end()) throw UnknownNode("unknown chunk: " + chunk_id);
    return it->second;
  }

  // Parent chunk via the unique membership edge.
  const std::string& parent_chunk(const std::string& sentence_id) const {
    auto it = parent_.find(sentence_id);
    if (it == parent_.end()) {
      throw OrphanSentence("sentence has no membership edge: " + sentence_id);
    }
    return it->second;
  }

  // Undirected KNN neighbors, sorted ascending.
  const std::vector<std::string>& neighbors(const std::string& sentence_id) const {
    static const std::vector<std::string> kEmpty;
    auto it = adjacency_.find(sentence_id);
    return it == adjacency_.end() ? kEmpty : it->second;
  }

  // Directed top-k picks of one sentence (out-degree <= k by construction).
  const std::vector<std::string>& directed_picks(const std::string& sentence_id) const {
    auto it = sentence_pos_.find(sentence_id);
    if (it == sentence_pos_.end()) {
      throw UnknownNode("unknown sentence: " + sentence_id);
    }
    return directed_[it->second];
  }

  // Undirected edge set as (a, b) pairs with a < b, sorted.
  std::vector<std::pair<std::string, std::string>> knn_edges() const {
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [id, nbrs] : adjacency_) {
      for (const auto& other : nbrs) {
        if (id < other) edges.emplace_back(id, other);
      }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
  }

  size_t knn_edge_count() const { return edge_count_; }
  size_t membership_edge_count() const { return parent_.size(); }

  void add_chunk(const std::string& id) {
    chunk_pos_[id] = chunk_ids.size();
    chunk_ids.push_back(id);
    chunk_members_[id];  // ensure entry
  }

  void add_sentence(const std::string& id) {
    sentence_pos_[id] = sentence_ids.size();
    sentence_ids.push_back(id);
    directed_.emplace_back();
  }

  void add_membership(const std::string& chunk_id, const std::string& sentence_id) {
    chunk_members_.at(chunk_id).push_back(sentence_id);
    parent_[sentence_id] = chunk_id;
  }

  void set_directed_picks(size_t sentence_pos, std::vector<std::string> picks) {
    directed_[sentence_pos] = std::move(picks);
  }

  // Derives the undirected adjacency from the directed picks. Call once
  // after all picks are set.
  void finalize_edges() {
    adjacency_.clear();
    std::set<std::pair<std::string, std::string>> seen;
    for (size_t i = 0; i < sentence_ids.size(); ++i) {
      const std::string& src = sentence_ids[i];
      for (const auto& dst : directed_[i]) {
        auto key = src < dst ? std::make_pair(src, dst) : std::make_pair(dst, src);
        if (!seen.insert(key).second) continue;
        adjacency_[key.first].push_back(key.second);
        adjacency_[key.second].push_back(key.first);
      }
    }
    for (auto& [_, nbrs] : adjacency_) std::sort(nbrs.begin(), nbrs.end());
    edge_count_ = seen.size();
  }

 private:
  std::unordered_map<std::string, size_t> chunk_pos_;
  std::unordered_map<std::string, size_t> sentence_pos_;
  std::unordered_map<std::string, std::vector<std::string>> chunk_members_;
  std::unordered_map<std::string, std::string> parent_;
  std::vector<std::vector<std::string>> directed_;  // parallel to sentence_ids
  std::unordered_map<std::string, std::vector<std::string>> adjacency_;
  size_t edge_count_ = 0;
};

// Directed top-k neighbor lists for every sentence, computable once and
// shared across granularities (the KNN relation does not depend on the
// chunking).
using KnnPicks = std::vector<std::vector<std::string>>;

inline KnnPicks compute_knn_picks(const std::vector<std::string>& sentence_ids,
                                  const NeighborScorer& scorer, uint32_t k) {
  if (scorer.size() != sentence_ids.size()) {
    throw DimensionMismatch("scorer covers " + std::to_string(scorer.size()) +
                            " sentences, corpus has " +
                            std::to_string(sentence_ids.size()));
  }
  KnnPicks picks(sentence_ids.size());
  std::vector<size_t> order(sentence_ids.size());
  for (size_t i = 0; i < sentence_ids.size(); ++i) {
    auto scores = scorer.scores_from(i);
    order.clear();
    for (size_t j = 0; j < sentence_ids.size(); ++j) {
      if (j != i) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return sentence_ids[a] < sentence_ids[b];
    });
    size_t take = std::min<size_t>(k, order.size());
    picks[i].reserve(take);
    for (size_t t = 0; t < take; ++t) picks[i].push_back(sentence_ids[order[t]]);
  }
  return picks;
}

// Dense scoring uses the stored sentence vectors; BM25 scores each sentence
// text as a query over all other sentences.
inline std::unique_ptr<NeighborScorer> make_neighbor_scorer(
    NeighborScorer::Kind kind, const ConversationCorpus& corpus,
    const IndexTables& tables) {
  if (kind == NeighborScorer::Kind::Bm25) {
    std::vector<std::string> texts;
    texts.reserve(corpus.sentences.size());
    for (const auto& s : corpus.sentences) texts.push_back(s.text);
    return std::make_unique<Bm25NeighborScorer>(std::move(texts));
  }
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    const MemoryUnitRef* unit = tables.find(TableKind::Sentence, s.id);
    if (unit == nullptr) {
      throw UnknownNode("sentence missing from index: " + s.id);
    }
    vectors.push_back(unit->vector);
  }
  return std::make_unique<CosineNeighborScorer>(std::move(vectors));
}

// Builds the graph for one granularity. `cached_picks` lets callers reuse
// the KNN relation across granularities; it must come from the same corpus,
// scorer kind and k.
inline SentenceGraph build_graph(const ConversationCorpus& corpus,
                                 Granularity granularity, uint32_t k,
                                 const NeighborScorer& scorer,
                                 const KnnPicks* cached_picks = nullptr) {
  if (corpus.sentences.empty()) {
    throw EmptyCorpus("build_graph: corpus has no sentences");
  }
  SentenceGraph graph;
  graph.granularity = granularity;
  graph.k = k;
  graph.scorer_kind = scorer.kind();

  for (const auto& s : corpus.sentences) graph.add_sentence(s.id);
  for (const auto& chunk : chunks_at(corpus, granularity)) {
    graph.add_chunk(chunk.id);
    for (const auto& sid : chunk.sentence_ids) graph.add_membership(chunk.id, sid);
  }

  KnnPicks picks;
  const KnnPicks* use = cached_picks;
  if (use == nullptr) {
    picks = compute_knn_picks(graph.sentence_ids, scorer, k);
    use = &picks;
  }
  for (size_t i = 0; i < graph.sentence_ids.size(); ++i) {
    graph.set_directed_picks(i, (*use)[i]);
  }
  graph.finalize_edges();
  return graph;
}

// Breadth-first expansion over KNN edges only, h levels out from the seeds.
// Membership edges are never traversed. h = 0 returns the seeds unchanged.
inline std::set<std::string> expand_hops(const SentenceGraph& graph,
                                         const std::vector<std::string>& seeds,
                                         uint32_t h) {
  std::set<std::string> visited;
  std::vector<std::string> frontier;
  for (const auto& seed : seeds) {
    if (!graph.has_sentence(seed)) {
      throw UnknownNode("expand_hops: not a sentence node: " + seed);
    }
    if (visited.insert(seed).second) frontier.push_back(seed);
  }
  for (uint32_t hop = 0; hop < h && !frontier.empty(); ++hop) {
    std::vector<std::string> next;
    for (const auto& id : frontier) {
      for (const auto& nbr : graph.neighbors(id)) {
        if (visited.insert(nbr).second) next.push_back(nbr);
      }
    }
    frontier = std::move(next);
  }
  return visited;
}

// Groups sentences by their parent chunk. Throws OrphanSentence when a
// sentence has no membership edge.
inline std::map<std::string, std::set<std::string>> sentences_to_chunks(
    const SentenceGraph& graph, const std::set<std::string>& sentence_ids) {
  std::map<std::string, std::set<std::string>> grouped;
  for (const auto& sid : sentence_ids) {
    if (!graph.has_sentence(sid)) {
      throw UnknownNode("sentences_to_chunks: not a sentence node: " + sid);
    }
    grouped[graph.parent_chunk(sid)].insert(sid);
  }
  return grouped;
}

inline constexpr char kGraphMagic[] = "SGMEMGPH";
inline constexpr uint8_t kGraphVersion = 1;

inline void save_graph(const SentenceGraph& graph, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for write: " + path);
  os.write(kGraphMagic, 8);
  io::write_u8(os, kGraphVersion);
  io::write_u8(os, static_cast<uint8_t>(graph.granularity));
  io::write_u32(os, graph.k);
  io::write_u8(os, static_cast<uint8_t>(graph.scorer_kind));
  io::write_u64(os, graph.chunk_ids.size());
  for (const auto& id : graph.chunk_ids) io::write_string(os, id);
  io::write_u64(os, graph.sentence_ids.size());
  for (const auto& id : graph.sentence_ids) io::write_string(os, id);
  // membership edges, chunk build order
  uint64_t membership = 0;
  for (const auto& id : graph.chunk_ids) membership += graph.members_of(id).size();
  io::write_u64(os, membership);
  for (const auto& id : graph.chunk_ids) {
    for (const auto& sid : graph.members_of(id)) {
      io::write_string(os, id);
      io::write_string(os, sid);
    }
  }
  // directed picks; the undirected set is derived on load
  for (const auto& sid : graph.sentence_ids) {
    const auto& picks = graph.directed_picks(sid);
    io::write_u32(os, static_cast<uint32_t>(picks.size()));
    for (const auto& p : picks) io::write_string(os, p);
  }
  if (!os) throw IoError("write failed: " + path);
}

inline SentenceGraph load_graph(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for read: " + path);
  io::expect_magic(is, kGraphMagic);
  uint8_t version = io::read_u8(is);
  if (version != kGraphVersion) {
    throw SchemaVersionMismatch("graph version " + std::to_string(version) +
                                ", expected " + std::to_string(kGraphVersion));
  }
  SentenceGraph graph;
  graph.granularity = static_cast<Granularity>(io::read_u8(is));
  graph.k = io::read_u32(is);
  graph.scorer_kind = static_cast<NeighborScorer::Kind>(io::read_u8(is));
  uint64_t chunk_count = io::read_u64(is);
  for (uint64_t i = 0; i < chunk_count; ++i) graph.add_chunk(io::read_string(is));
  uint64_t sentence_count = io::read_u64(is);
  for (uint64_t i = 0; i < sentence_count; ++i) graph.add_sentence(io::read_string(is));
  uint64_t membership = io::read_u64(is);
  for (uint64_t i = 0; i < membership; ++i) {
    std::string chunk_id = io::read_string(is);
    std::string sentence_id = io::read_string(is);
    graph.add_membership(chunk_id, sentence_id);
  }
  for (uint64_t i = 0; i < sentence_count; ++i) {
    uint32_t len = io::read_u32(is);
    std::vector<std::string> picks;
    picks.reserve(len);
    for (uint32_t j = 0; j < len; ++j) picks.push_back(io::read_string(is));
    graph.set_directed_picks(i, std::move(picks));
  }
  graph.finalize_edges();
  return graph;
}

}  // namespace sgmem
