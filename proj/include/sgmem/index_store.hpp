#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgmem/conversation.hpp"
#include "sgmem/embedding.hpp"
#include "sgmem/errors.hpp"
#include "sgmem/memory_generation.hpp"
#include "sgmem/serialization.hpp"

namespace sgmem {

// The seven index tables: raw dialogue units at four granularities plus the
// three generated-memory kinds.
enum class TableKind : uint8_t {
  Session = 0,
  Round = 1,
  Turn = 2,
  Sentence = 3,
  Summary = 4,
  Fact = 5,
  Insight = 6,
};

inline constexpr size_t kTableCount = 7;

inline const char* table_name(TableKind t) {
  switch (t) {
    case TableKind::Session: return "session";
    case TableKind::Round: return "round";
    case TableKind::Turn: return "turn";
    case TableKind::Sentence: return "sentence";
    case TableKind::Summary: return "summary";
    case TableKind::Fact: return "fact";
    default: return "insight";
  }
}

inline TableKind table_from_name(const std::string& name) {
  for (size_t i = 0; i < kTableCount; ++i) {
    if (name == table_name(static_cast<TableKind>(i))) {
      return static_cast<TableKind>(i);
    }
  }
  throw UnknownTable("unknown table: " + name);
}

inline TableKind table_for_granularity(Granularity g) {
  switch (g) {
    case Granularity::Turn: return TableKind::Turn;
    case Granularity::Round: return TableKind::Round;
    default: return TableKind::Session;
  }
}

struct MemoryUnitRef {
  TableKind table = TableKind::Session;
  std::string unit_id;
  EmbeddingVector vector;
  std::string text;
  std::string timestamp;
};

struct ScoredHit {
  const MemoryUnitRef* ref = nullptr;
  double score = 0.0;  // shifted similarity

  const std::string& id() const { return ref->unit_id; }
};

class IndexTables {
 public:
  std::string provider_fingerprint;
  uint32_t dim = 0;

  const std::vector<MemoryUnitRef>& table(TableKind t) const {
    return tables_[static_cast<size_t>(t)];
  }

  size_t total_units() const {
    size_t n = 0;
    for (const auto& t : tables_) n += t.size();
    return n;
  }

  void insert(MemoryUnitRef unit) {
    if (dim != 0 && unit.vector.size() != dim) {
      throw DimensionMismatch("unit " + unit.unit_id + " has dim " +
                              std::to_string(unit.vector.size()) +
                              ", table dim " + std::to_string(dim));
    }
    auto& tab = tables_[static_cast<size_t>(unit.table)];
    index_[static_cast<size_t>(unit.table)][unit.unit_id] = tab.size();
    tab.push_back(std::move(unit));
  }

  const MemoryUnitRef* find(TableKind t, const std::string& id) const {
    const auto& idx = index_[static_cast<size_t>(t)];
    auto it = idx.find(id);
    if (it == idx.end()) return nullptr;
    return &tables_[static_cast<size_t>(t)][it->second];
  }

 private:
  std::array<std::vector<MemoryUnitRef>, kTableCount> tables_;
  std::array<std::unordered_map<std::string, size_t>, kTableCount> index_;
};

namespace detail {

inline void insert_embedded(IndexTables& tables, TableKind kind,
                            const EmbeddingProvider& provider,
                            const std::vector<std::string>& ids,
                            const std::vector<std::string>& texts,
                            const std::vector<std::string>& timestamps) {
  if (ids.empty()) return;
  auto vectors = provider.embed(texts);
  for (size_t i = 0; i < ids.size(); ++i) {
    MemoryUnitRef u;
    u.table = kind;
    u.unit_id = ids[i];
    u.vector = std::move(vectors[i]);
    u.text = texts[i];
    u.timestamp = timestamps[i];
    tables.insert(std::move(u));
  }
}

inline void collect_chunks(const ConversationCorpus& corpus, Granularity g,
                           std::vector<std::string>* ids,
                           std::vector<std::string>* texts,
                           std::vector<std::string>* timestamps) {
  for (auto& c : chunks_at(corpus, g)) {
    ids->push_back(c.id);
    texts->push_back(c.text);
    timestamps->push_back(c.timestamp);
  }
}

}  // namespace detail

// Embeds every session, round, turn, sentence and generated memory into its
// table. Aborts (by propagation) if the provider fails; nothing is
// persisted by this call.
inline IndexTables build_tables(const ConversationCorpus& corpus,
                                const std::vector<GeneratedMemory>& generated,
                                const EmbeddingProvider& provider) {
  IndexTables tables;
  tables.provider_fingerprint = provider.fingerprint();
  tables.dim = static_cast<uint32_t>(provider.dim());

  for (Granularity g :
       {Granularity::Session, Granularity::Round, Granularity::Turn}) {
    std::vector<std::string> ids, texts, timestamps;
    detail::collect_chunks(corpus, g, &ids, &texts, &timestamps);
    detail::insert_embedded(tables, table_for_granularity(g), provider, ids,
                            texts, timestamps);
  }
  {
    std::vector<std::string> ids, texts, timestamps;
    for (const auto& s : corpus.sentences) {
      ids.push_back(s.id);
      texts.push_back(s.text);
      const Turn& t = corpus.turn(s.turn_id);
      timestamps.push_back(detail::effective_turn_timestamp(corpus, t));
    }
    detail::insert_embedded(tables, TableKind::Sentence, provider, ids, texts,
                            timestamps);
  }
  for (MemoryKind kind :
       {MemoryKind::Summary, MemoryKind::Fact, MemoryKind::Insight}) {
    std::vector<std::string> ids, texts, timestamps;
    for (const auto& m : generated) {
      if (m.kind != kind) continue;
      ids.push_back(m.id);
      texts.push_back(m.content);
      timestamps.push_back(m.timestamp);
    }
    TableKind t = kind == MemoryKind::Summary  ? TableKind::Summary
                  : kind == MemoryKind::Fact   ? TableKind::Fact
                                               : TableKind::Insight;
    detail::insert_embedded(tables, t, provider, ids, texts, timestamps);
  }
  return tables;
}

namespace detail {

inline void sort_hits(std::vector<ScoredHit>& hits) {
  std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id() < b.id();
  });
}

}  // namespace detail

// Exact top-K by shifted similarity; ties broken by ascending unit id.
// Returns fewer than K hits only when the table is smaller than K.
inline std::vector<ScoredHit> search_topk(const IndexTables& tables,
                                          TableKind kind,
                                          const EmbeddingVector& query_vec,
                                          size_t K, double epsilon) {
  const auto& tab = tables.table(kind);
  std::vector<ScoredHit> hits;
  hits.reserve(tab.size());
  for (const auto& unit : tab) {
    hits.push_back({&unit, shifted_similarity(query_vec, unit.vector, epsilon)});
  }
  detail::sort_hits(hits);
  if (hits.size() > K) hits.resize(K);
  return hits;
}

// All sentences with shifted similarity >= gamma, truncated to the n
// highest. Same ordering contract as search_topk.
inline std::vector<ScoredHit> search_sentences(const IndexTables& tables,
                                               const EmbeddingVector& query_vec,
                                               double gamma, size_t n,
                                               double epsilon) {
  const auto& tab = tables.table(TableKind::Sentence);
  std::vector<ScoredHit> hits;
  for (const auto& unit : tab) {
    double score = shifted_similarity(query_vec, unit.vector, epsilon);
    if (score >= gamma) hits.push_back({&unit, score});
  }
  detail::sort_hits(hits);
  if (hits.size() > n) hits.resize(n);
  return hits;
}

inline constexpr char kIndexMagic[] = "SGMEMIDX";
inline constexpr uint8_t kIndexVersion = 1;

inline void save_tables(const IndexTables& tables, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for write: " + path);
  os.write(kIndexMagic, 8);
  io::write_u8(os, kIndexVersion);
  io::write_string(os, tables.provider_fingerprint);
  io::write_u32(os, tables.dim);
  for (size_t t = 0; t < kTableCount; ++t) {
    const auto& tab = tables.table(static_cast<TableKind>(t));
    io::write_u64(os, tab.size());
    for (const auto& unit : tab) {
      io::write_string(os, unit.unit_id);
      io::write_string(os, unit.text);
      io::write_string(os, unit.timestamp);
      for (float x : unit.vector) io::write_f32(os, x);
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

// Loads a table file. A fingerprint different from `expected_fingerprint`
// (when given) is reported through `warning` but does not fail the load.
inline IndexTables load_tables(const std::string& path,
                               const std::string& expected_fingerprint = "",
                               std::string* warning = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for read: " + path);
  io::expect_magic(is, kIndexMagic);
  uint8_t version = io::read_u8(is);
  if (version != kIndexVersion) {
    throw SchemaVersionMismatch("index store version " + std::to_string(version) +
                                ", expected " + std::to_string(kIndexVersion));
  }
  IndexTables tables;
  tables.provider_fingerprint = io::read_string(is);
  tables.dim = io::read_u32(is);
  for (size_t t = 0; t < kTableCount; ++t) {
    uint64_t count = io::read_u64(is);
    for (uint64_t i = 0; i < count; ++i) {
      MemoryUnitRef u;
      u.table = static_cast<TableKind>(t);
      u.unit_id = io::read_string(is);
      u.text = io::read_string(is);
      u.timestamp = io::read_string(is);
      u.vector.resize(tables.dim);
      for (uint32_t d = 0; d < tables.dim; ++d) u.vector[d] = io::read_f32(is);
      tables.insert(std::move(u));
    }
  }
  if (!expected_fingerprint.empty() &&
      expected_fingerprint != tables.provider_fingerprint && warning) {
    *warning = "provider fingerprint mismatch: store has '" +
               tables.provider_fingerprint + "', current provider is '" +
               expected_fingerprint + "'";
  }
  return tables;
}

}  // namespace sgmem
